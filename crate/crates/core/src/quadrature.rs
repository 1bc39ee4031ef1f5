//! Gauss quadrature rules used in velocity (Hermite) and space (Legendre).

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre as GlRule;

/// Gauss-Legendre rule on the reference interval [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let rule = GlRule::new(n.try_into().expect("nonzero"));
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Gauss-Hermite rule for the standard Gaussian weight `M(v) = exp(-v^2/2)/sqrt(2 pi)`.
///
/// Nodes and weights come from Newton iteration on the orthonormal Hermite
/// recurrence, which keeps full relative accuracy in the tail weights (an
/// eigenvector-based Golub-Welsch rule does not at a hundred nodes and more).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    /// Nodes `v_i`, ascending.
    pub nodes: Vec<f64>,
    /// Weights for `∫ g(v) M(v) dv ≈ Σ w_i g(v_i)`; they sum to one.
    pub weights: Vec<f64>,
    /// Weights for the unweighted integral `∫ g(v) dv ≈ Σ w̃_i g(v_i)`, i.e. `w_i / M(v_i)`.
    pub unweighted: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Hermite rule needs at least one node");
        let nf = n as f64;
        let pim4 = PI.powf(-0.25);
        // Jacobi matrix eigenvalues give nodes to near machine precision; only
        // the weights need the recurrence. Physicists' scaling: x = v / sqrt(2).
        let jac = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
        guesses.sort_by(|a, b| b.total_cmp(a));
        let mut x = vec![0.0; n];
        let mut logw = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = guesses[i];
            let mut pp = 0.0;
            for _ in 0..20 {
                let (p1, p2) = normalized_hermite_pair(n, z, pim4);
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            // refresh the derivative at the converged node
            let (_, p2) = normalized_hermite_pair(n, z, pim4);
            if p2 != 0.0 {
                pp = (2.0 * nf).sqrt() * p2;
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            let lw = 2f64.ln() - 2.0 * pp.abs().ln();
            logw[i] = lw;
            logw[n - 1 - i] = lw;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut unweighted = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let xi = x[i];
            nodes.push(2f64.sqrt() * xi);
            weights.push((logw[i]).exp() / PI.sqrt());
            // w / M(v) with v = sqrt(2) x:  w_phys * sqrt(2) * e^{x^2}
            unweighted.push((logw[i] + xi * xi).exp() * 2f64.sqrt());
        }
        Self {
            nodes,
            weights,
            unweighted,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Orthonormal physicists' Hermite values `(p_n(z), p_{n-1}(z))`.
fn normalized_hermite_pair(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}
