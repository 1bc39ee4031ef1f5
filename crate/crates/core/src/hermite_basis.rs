//! Scaled Hermite functions `ψ_k(v) = (1/v_th) J_k(v/v_th) M(v/v_th)` and the
//! coefficient storage of the Hermite-DG discretization.

use std::f64::consts::PI;

use crate::dg_space::{linf_of, DgFunction, DgMesh};
use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

/// Normalized probabilists' Hermite polynomial `J_k(x)`:
/// `√(k+1) J_{k+1} = x J_k − √k J_{k−1}`, `J_0 = 1`.
pub fn eval_probabilist_hermite(k: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `J_0(x) .. J_{n-1}(x)`.
pub fn probabilist_hermite_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for j in 1..n.saturating_sub(1) {
        let jf = j as f64;
        out[j + 1] = (x * out[j] - jf.sqrt() * out[j - 1]) / (jf + 1.0).sqrt();
    }
    out
}

/// Standard Gaussian `exp(−x²/2)/√(2π)`.
pub fn std_maxwellian(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis {
    pub n_modes: usize,
    pub v_th: f64,
}

impl HermiteBasis {
    pub fn new(n_modes: usize, v_th: f64) -> Result<Self> {
        if n_modes < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 Hermite modes, got {n_modes}"
            )));
        }
        if !(v_th > 0.0 && v_th.is_finite()) {
            return Err(Error::InvalidParameter(format!("v_th = {v_th}")));
        }
        Ok(Self { n_modes, v_th })
    }

    /// `ψ_k(v)`; `k` may exceed `n_modes − 1` (used for derivatives).
    pub fn eval(&self, k: usize, v: f64) -> f64 {
        *self.eval_upto(k + 1, v).last().expect("k + 1 > 0")
    }

    /// `ψ_0(v) .. ψ_{n_modes−1}(v)`.
    pub fn eval_all(&self, v: f64) -> Vec<f64> {
        self.eval_upto(self.n_modes, v)
    }

    /// First `n` functions, with the Gaussian carried through the recurrence.
    pub fn eval_upto(&self, n: usize, v: f64) -> Vec<f64> {
        let s = v / self.v_th;
        let mut out = vec![0.0; n];
        if n == 0 {
            return out;
        }
        out[0] = std_maxwellian(s) / self.v_th;
        if n > 1 {
            out[1] = s * out[0];
        }
        for j in 1..n.saturating_sub(1) {
            let jf = j as f64;
            out[j + 1] = (s * out[j] - jf.sqrt() * out[j - 1]) / (jf + 1.0).sqrt();
        }
        out
    }
}

/// Hermite coefficients `α_k(x)` of all modes, each a DG function, plus the
/// activity mask. Storage is mode-major: `data[(k * N_x + j) * n_loc + p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCoefficients {
    pub n_modes: usize,
    pub n_cells: usize,
    pub n_loc: usize,
    pub data: Vec<f64>,
    pub active: Vec<bool>,
}

impl HermiteCoefficients {
    pub fn zeros(n_modes: usize, mesh: &DgMesh) -> Self {
        Self {
            n_modes,
            n_cells: mesh.n_cells,
            n_loc: mesh.n_loc(),
            data: vec![0.0; n_modes * mesh.n_dofs()],
            active: vec![true; n_modes],
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cells * self.n_loc
    }

    pub fn mode(&self, k: usize) -> &[f64] {
        let nd = self.n_dofs();
        &self.data[k * nd..(k + 1) * nd]
    }

    pub fn mode_mut(&mut self, k: usize) -> &mut [f64] {
        let nd = self.n_dofs();
        &mut self.data[k * nd..(k + 1) * nd]
    }

    pub fn mode_function(&self, mesh: &DgMesh, k: usize) -> DgFunction {
        DgFunction::from_coeffs(mesh, self.mode(k).to_vec())
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// Zeroes every inactive mode.
    pub fn apply_mask(&mut self) {
        for k in 0..self.n_modes {
            if !self.active[k] {
                self.mode_mut(k).fill(0.0);
            }
        }
    }

    pub fn mode_linf(&self, mesh: &DgMesh, k: usize) -> f64 {
        if k >= self.n_modes {
            0.0
        } else {
            linf_of(mesh, self.mode(k))
        }
    }

    pub fn mode_l2(&self, k: usize) -> f64 {
        self.mode(k).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `α_k(x)` for every mode.
    pub fn eval_at(&self, mesh: &DgMesh, x: f64) -> Vec<f64> {
        let (j, xi) = mesh.locate(x);
        let phi = mesh.basis.eval_at(xi);
        let nl = self.n_loc;
        (0..self.n_modes)
            .map(|k| {
                let c = &self.mode(k)[j * nl..(j + 1) * nl];
                c.iter().zip(&phi).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Number of Gauss-Hermite nodes used to project initial data.
pub fn projection_nodes(n_modes: usize) -> usize {
    (2 * n_modes).max(64)
}

/// Projects `f0(x, v)` onto the Hermite-DG space: velocity moments against
/// `J_k(v/v_th)` by Gauss-Hermite quadrature, then L² projection in each cell.
pub fn project_initial_data(
    basis: &HermiteBasis,
    mesh: &DgMesh,
    mut f0: impl FnMut(f64, f64) -> f64,
) -> Result<HermiteCoefficients> {
    let nh = basis.n_modes;
    let gh = GaussHermite::new(projection_nodes(nh));
    let jtab: Vec<Vec<f64>> = gh.nodes.iter().map(|&s| probabilist_hermite_all(nh, s)).collect();
    let mut out = HermiteCoefficients::zeros(nh, mesh);
    let b = &mesh.basis;
    let (nl, nd) = (b.n_loc, mesh.n_dofs());
    let mut alpha_q = vec![0.0; nh];
    for j in 0..mesh.n_cells {
        for q in 0..b.n_quad() {
            let x = mesh.quad_point(j, q);
            alpha_q.fill(0.0);
            for (i, &s) in gh.nodes.iter().enumerate() {
                let fv = f0(x, basis.v_th * s);
                if !fv.is_finite() {
                    return Err(Error::QuadratureOverflow(format!(
                        "f0({x}, {}) = {fv}",
                        basis.v_th * s
                    )));
                }
                let wf = basis.v_th * gh.unweighted[i] * fv;
                if wf == 0.0 {
                    continue;
                }
                for (a, jk) in alpha_q.iter_mut().zip(&jtab[i]) {
                    *a += wf * jk;
                }
            }
            for (k, a) in alpha_q.iter().enumerate() {
                let v = a * b.jw[q];
                for p in 0..nl {
                    out.data[k * nd + j * nl + p] += v * b.val[q * nl + p];
                }
            }
        }
    }
    if out.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureOverflow("non-finite projected coefficient".into()));
    }
    Ok(out)
}

/// `f_h(x, v) = Σ_k α_k(x) ψ_k(v)`.
pub fn reconstruct_distribution(
    coeffs: &HermiteCoefficients,
    basis: &HermiteBasis,
    mesh: &DgMesh,
    x: f64,
    v: f64,
) -> f64 {
    let a = coeffs.eval_at(mesh, x);
    let psi = basis.eval_upto(coeffs.n_modes, v);
    a.iter().zip(&psi).map(|(x, y)| x * y).sum()
}
