//! Periodic 1D discontinuous Galerkin spaces: mesh, orthonormal Legendre
//! basis, Lax-Friedrichs transport residual and the LDG Poisson solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Legendre polynomials `P_0..P_{n-1}` and their derivatives at `xi`.
pub fn legendre_with_derivative(n: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    if n == 0 {
        return (p, dp);
    }
    p[0] = 1.0;
    if n > 1 {
        p[1] = xi;
        dp[1] = 1.0;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * xi * p[k] - kf * p[k - 1]) / (kf + 1.0);
        dp[k + 1] = dp[k - 1] + (2.0 * kf + 1.0) * p[k];
    }
    (p, dp)
}

/// Cell-local orthonormal Legendre basis `φ_p = sqrt((2p+1)/h) P_p(ξ)` with
/// its quadrature tables. Every cell of a uniform mesh shares these tables.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub n_loc: usize,
    pub h: f64,
    pub quad: GaussLegendre,
    /// `φ_p(x_q)`, indexed `q * n_loc + p`.
    pub val: Vec<f64>,
    /// `φ_p'(x_q)`, indexed `q * n_loc + p`.
    pub dval: Vec<f64>,
    /// `(h/2) w_q`, the physical quadrature weights of one cell.
    pub jw: Vec<f64>,
    /// Trace at the right end of the cell, `φ_p(x_{j+1/2}^-)`.
    pub right: Vec<f64>,
    /// Trace at the left end of the cell, `φ_p(x_{j-1/2}^+)`.
    pub left: Vec<f64>,
    /// `S[p][r] = ∫ φ_r φ_p' dx`, indexed `p * n_loc + r`.
    pub stiff: Vec<f64>,
}

impl LocalBasis {
    pub fn new(order: usize, h: f64, n_quad: usize) -> Self {
        let n_loc = order + 1;
        let quad = GaussLegendre::new(n_quad);
        let scale: Vec<f64> = (0..n_loc)
            .map(|p| ((2 * p + 1) as f64 / h).sqrt())
            .collect();
        let mut val = vec![0.0; n_quad * n_loc];
        let mut dval = vec![0.0; n_quad * n_loc];
        for (q, &xi) in quad.nodes.iter().enumerate() {
            let (p, dp) = legendre_with_derivative(n_loc, xi);
            for r in 0..n_loc {
                val[q * n_loc + r] = scale[r] * p[r];
                dval[q * n_loc + r] = scale[r] * dp[r] * 2.0 / h;
            }
        }
        let jw: Vec<f64> = quad.weights.iter().map(|w| 0.5 * h * w).collect();
        let right = scale.clone();
        let left: Vec<f64> = scale
            .iter()
            .enumerate()
            .map(|(p, s)| if p % 2 == 0 { *s } else { -s })
            .collect();
        let mut stiff = vec![0.0; n_loc * n_loc];
        for p in 0..n_loc {
            for r in 0..n_loc {
                stiff[p * n_loc + r] = (0..n_quad)
                    .map(|q| jw[q] * val[q * n_loc + r] * dval[q * n_loc + p])
                    .sum();
            }
        }
        Self {
            n_loc,
            h,
            quad,
            val,
            dval,
            jw,
            right,
            left,
            stiff,
        }
    }

    pub fn n_quad(&self) -> usize {
        self.quad.len()
    }

    /// Values of all basis functions at the reference point `xi ∈ [-1, 1]`.
    pub fn eval_at(&self, xi: f64) -> Vec<f64> {
        let (p, _) = legendre_with_derivative(self.n_loc, xi);
        p.iter()
            .enumerate()
            .map(|(r, v)| ((2 * r + 1) as f64 / self.h).sqrt() * v)
            .collect()
    }
}

/// Uniform periodic mesh of `(0, L)` with polynomial degree `order`.
#[derive(Debug, Clone)]
pub struct DgMesh {
    pub n_cells: usize,
    pub length: f64,
    pub order: usize,
    pub h: f64,
    pub basis: LocalBasis,
}

impl DgMesh {
    /// Mesh using `order + 2` Gauss-Legendre nodes per cell.
    pub fn new(n_cells: usize, length: f64, order: usize) -> Result<Self> {
        Self::with_quadrature(n_cells, length, order, order + 2)
    }

    pub fn with_quadrature(
        n_cells: usize,
        length: f64,
        order: usize,
        n_quad: usize,
    ) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter("mesh needs at least one cell".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!("domain length {length}")));
        }
        if n_quad < order + 1 {
            return Err(Error::InvalidParameter(format!(
                "{n_quad} quadrature nodes cannot integrate degree {order} products"
            )));
        }
        let h = length / n_cells as f64;
        Ok(Self {
            n_cells,
            length,
            order,
            h,
            basis: LocalBasis::new(order, h, n_quad),
        })
    }

    pub fn n_loc(&self) -> usize {
        self.order + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cells * self.n_loc()
    }

    pub fn n_quad(&self) -> usize {
        self.basis.n_quad()
    }

    /// Interface positions `x_{1/2} = 0, ..., x_{N+1/2} = L`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| i as f64 * self.h).collect()
    }

    pub fn cell_left(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Physical position of quadrature node `q` in cell `j`.
    pub fn quad_point(&self, j: usize, q: usize) -> f64 {
        self.cell_left(j) + 0.5 * self.h * (1.0 + self.basis.quad.nodes[q])
    }

    /// Cell index and reference coordinate of `x`, wrapped periodically.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let xr = x.rem_euclid(self.length);
        let j = ((xr / self.h).floor() as usize).min(self.n_cells - 1);
        let xi = 2.0 * (xr - self.cell_left(j)) / self.h - 1.0;
        (j, xi.clamp(-1.0, 1.0))
    }
}

/// Piecewise polynomial, coefficients indexed `j * n_loc + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction {
    pub n_cells: usize,
    pub n_loc: usize,
    pub coeffs: Vec<f64>,
}

impl DgFunction {
    pub fn zeros(mesh: &DgMesh) -> Self {
        Self {
            n_cells: mesh.n_cells,
            n_loc: mesh.n_loc(),
            coeffs: vec![0.0; mesh.n_dofs()],
        }
    }

    pub fn from_coeffs(mesh: &DgMesh, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), mesh.n_dofs());
        Self {
            n_cells: mesh.n_cells,
            n_loc: mesh.n_loc(),
            coeffs,
        }
    }

    /// L² projection of `f` using the mesh quadrature.
    pub fn project(mesh: &DgMesh, mut f: impl FnMut(f64) -> f64) -> Self {
        let b = &mesh.basis;
        let nl = b.n_loc;
        let mut out = Self::zeros(mesh);
        for j in 0..mesh.n_cells {
            for q in 0..b.n_quad() {
                let fv = f(mesh.quad_point(j, q)) * b.jw[q];
                for p in 0..nl {
                    out.coeffs[j * nl + p] += fv * b.val[q * nl + p];
                }
            }
        }
        out
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.n_loc..(j + 1) * self.n_loc]
    }

    pub fn cell_mean(&self, mesh: &DgMesh, j: usize) -> f64 {
        self.coeffs[j * self.n_loc] / mesh.h.sqrt()
    }

    pub fn integral(&self, mesh: &DgMesh) -> f64 {
        let s: f64 = (0..self.n_cells).map(|j| self.coeffs[j * self.n_loc]).sum();
        s * mesh.h.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, mesh: &DgMesh, x: f64) -> f64 {
        let (j, xi) = mesh.locate(x);
        let phi = mesh.basis.eval_at(xi);
        self.cell(j).iter().zip(&phi).map(|(c, v)| c * v).sum()
    }

    /// Values at every quadrature node, indexed `j * n_quad + q`.
    pub fn node_values(&self, mesh: &DgMesh) -> Vec<f64> {
        let mut out = vec![0.0; mesh.n_cells * mesh.n_quad()];
        node_values_into(mesh, &self.coeffs, &mut out);
        out
    }

    pub fn right_trace(&self, mesh: &DgMesh, j: usize) -> f64 {
        dot(self.cell(j), &mesh.basis.right)
    }

    pub fn left_trace(&self, mesh: &DgMesh, j: usize) -> f64 {
        dot(self.cell(j), &mesh.basis.left)
    }

    /// Maximum of |u| over quadrature nodes and cell traces.
    pub fn linf_norm(&self, mesh: &DgMesh) -> f64 {
        linf_of(mesh, &self.coeffs)
    }

    pub fn axpy(&mut self, a: f64, other: &DgFunction) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &DgFunction) -> DgFunction {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadrature-node values of raw coefficients (`j * n_loc + p` layout).
pub fn node_values_into(mesh: &DgMesh, coeffs: &[f64], out: &mut [f64]) {
    let b = &mesh.basis;
    let (nl, nq) = (b.n_loc, b.n_quad());
    for j in 0..mesh.n_cells {
        let c = &coeffs[j * nl..(j + 1) * nl];
        for q in 0..nq {
            out[j * nq + q] = dot(c, &b.val[q * nl..(q + 1) * nl]);
        }
    }
}

/// Projects node values (`j * n_quad + q`) back onto the DG basis, accumulating.
pub fn project_node_values_add(mesh: &DgMesh, values: &[f64], scale: f64, out: &mut [f64]) {
    let b = &mesh.basis;
    let (nl, nq) = (b.n_loc, b.n_quad());
    for j in 0..mesh.n_cells {
        for q in 0..nq {
            let v = scale * values[j * nq + q] * b.jw[q];
            if v == 0.0 {
                continue;
            }
            for p in 0..nl {
                out[j * nl + p] += v * b.val[q * nl + p];
            }
        }
    }
}

/// Max |u| over quadrature nodes and traces of raw coefficients.
pub fn linf_of(mesh: &DgMesh, coeffs: &[f64]) -> f64 {
    let b = &mesh.basis;
    let (nl, nq) = (b.n_loc, b.n_quad());
    let mut m: f64 = 0.0;
    for j in 0..mesh.n_cells {
        let c = &coeffs[j * nl..(j + 1) * nl];
        m = m.max(dot(c, &b.left).abs()).max(dot(c, &b.right).abs());
        for q in 0..nq {
            m = m.max(dot(c, &b.val[q * nl..(q + 1) * nl]).abs());
        }
    }
    m
}

/// Lax-Friedrichs flux `½(g⁻+g⁺) − (δ/2)(α⁺−α⁻)`; mode 0 is always centered.
pub fn numerical_flux(g_minus: f64, g_plus: f64, a_minus: f64, a_plus: f64, k: usize, delta: f64) -> f64 {
    let d = if k == 0 { 0.0 } else { delta };
    0.5 * (g_minus + g_plus) - 0.5 * d * (a_plus - a_minus)
}

/// Weak derivative `−∫ g φ_p' + ĝ_{j+1/2} φ_p⁻ − ĝ_{j−1/2} φ_p⁺` for one Hermite mode,
/// accumulated into `out` times `scale`.
pub fn transport_residual_add(
    mesh: &DgMesh,
    g: &[f64],
    a: &[f64],
    k: usize,
    delta: f64,
    scale: f64,
    out: &mut [f64],
) {
    let b = &mesh.basis;
    let nl = b.n_loc;
    let n = mesh.n_cells;
    for j in 0..n {
        let gj = &g[j * nl..(j + 1) * nl];
        for p in 0..nl {
            let s = dot(&b.stiff[p * nl..(p + 1) * nl], gj);
            out[j * nl + p] -= scale * s;
        }
    }
    // interface j+1/2 between cell j (minus) and cell j+1 (plus)
    for j in 0..n {
        let jp = (j + 1) % n;
        let gm = dot(&g[j * nl..(j + 1) * nl], &b.right);
        let gp = dot(&g[jp * nl..(jp + 1) * nl], &b.left);
        let am = dot(&a[j * nl..(j + 1) * nl], &b.right);
        let ap = dot(&a[jp * nl..(jp + 1) * nl], &b.left);
        let flux = scale * numerical_flux(gm, gp, am, ap, k, delta);
        for p in 0..nl {
            out[j * nl + p] += flux * b.right[p];
            out[jp * nl + p] -= flux * b.left[p];
        }
    }
}

/// Transport residual of mode `k`: builds `g_k = v_th(√(k+1) α_{k+1} + √k α_{k−1})`
/// from the mode-major coefficient array (`α_{N_H} = 0`).
pub fn assemble_transport(
    mesh: &DgMesh,
    v_th: f64,
    alpha: &[f64],
    n_modes: usize,
    k: usize,
    delta: f64,
) -> Vec<f64> {
    let nd = mesh.n_dofs();
    let mut g = vec![0.0; nd];
    if k + 1 < n_modes {
        let c = v_th * ((k + 1) as f64).sqrt();
        for (gi, ai) in g.iter_mut().zip(&alpha[(k + 1) * nd..(k + 2) * nd]) {
            *gi += c * ai;
        }
    }
    if k >= 1 {
        let c = v_th * (k as f64).sqrt();
        for (gi, ai) in g.iter_mut().zip(&alpha[(k - 1) * nd..k * nd]) {
            *gi += c * ai;
        }
    }
    let mut out = vec![0.0; nd];
    transport_residual_add(mesh, &g, &alpha[k * nd..(k + 1) * nd], k, delta, 1.0, &mut out);
    out
}

/// Default LDG penalty. With the centered `φ̂`, a penalty of order one keeps
/// both `φ` and `E` at order `l+1`; `β = 1/h` drops `E` to order `l`.
pub const DEFAULT_BETA: f64 = 1.0;

/// Potential and field from the LDG Poisson solve.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub phi: DgFunction,
    pub efield: DgFunction,
}

/// LDG discretization of `−φ'' = rhs`, `E = −φ'` with fluxes `φ̂ = {φ}`,
/// `Ê = {E} − β[φ]` and the constraint `∫φ = 0`, factorized once.
#[derive(Debug, Clone)]
pub struct LdgPoisson {
    pub mesh: DgMesh,
    pub beta: f64,
    /// `E = G φ`.
    pub grad: DMatrix<f64>,
    /// `A φ = rhs` with `A = K G + P`.
    pub laplacian: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl LdgPoisson {
    /// Uses the default penalty `β = 1`.
    pub fn new(mesh: &DgMesh) -> Result<Self> {
        Self::with_beta(mesh, DEFAULT_BETA)
    }

    pub fn with_beta(mesh: &DgMesh, beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("LDG penalty β = {beta}")));
        }
        let nd = mesh.n_dofs();
        let mut grad = DMatrix::zeros(nd, nd);
        let mut lap = DMatrix::zeros(nd, nd);
        let mut unit = vec![0.0; nd];
        for c in 0..nd {
            unit[c] = 1.0;
            let e = apply_gradient(mesh, &unit);
            let a = apply_divergence(mesh, &e, &unit, beta);
            for r in 0..nd {
                grad[(r, c)] = e[r];
                lap[(r, c)] = a[r];
            }
            unit[c] = 0.0;
        }
        let lu = constrained_matrix(mesh, &lap, None).lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem("LDG Poisson matrix".into()));
        }
        Ok(Self {
            mesh: mesh.clone(),
            beta,
            grad,
            laplacian: lap,
            lu,
        })
    }

    /// Solves with right-hand side `rhs` (typically `n_i − α_0`).
    pub fn solve(&self, rhs: &DgFunction) -> Result<FieldSolution> {
        let mesh = &self.mesh;
        let mean = rhs.integral(mesh);
        let tol = 1e-10 * rhs.l2_norm().max(1.0);
        if mean.abs() > tol {
            return Err(Error::Compatibility(mean));
        }
        let nd = mesh.n_dofs();
        let mut b = DVector::zeros(nd + 1);
        b.rows_mut(0, nd).copy_from_slice(&rhs.coeffs);
        let x = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::SingularSystem("LDG Poisson solve".into()))?;
        let phi = DgFunction::from_coeffs(mesh, x.rows(0, nd).iter().copied().collect());
        let efield = self.gradient(&phi);
        Ok(FieldSolution { phi, efield })
    }

    /// `½ φᵀ A φ = ½‖E_h‖² + ½ β Σ [φ]²`, the field energy the LDG pair conserves.
    pub fn field_energy(&self, phi: &DgFunction) -> f64 {
        let p = DVector::from_column_slice(&phi.coeffs);
        0.5 * p.dot(&(&self.laplacian * &p))
    }

    pub fn gradient(&self, phi: &DgFunction) -> DgFunction {
        let e = &self.grad * DVector::from_column_slice(&phi.coeffs);
        DgFunction::from_coeffs(&self.mesh, e.iter().copied().collect())
    }
}

/// Bordered matrix `[A m; mᵀ 0]` with `m = ∫φ_p`, optionally adding `extra` to `A`.
pub fn constrained_matrix(mesh: &DgMesh, a: &DMatrix<f64>, extra: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let nd = mesh.n_dofs();
    let nl = mesh.n_loc();
    let mut m = DMatrix::zeros(nd + 1, nd + 1);
    m.view_mut((0, 0), (nd, nd)).copy_from(a);
    if let Some(e) = extra {
        let mut v = m.view_mut((0, 0), (nd, nd));
        v += e;
    }
    let sh = mesh.h.sqrt();
    for j in 0..mesh.n_cells {
        m[(j * nl, nd)] = sh;
        m[(nd, j * nl)] = sh;
    }
    m
}

/// First LDG equation: `E_p = ∫φ φ_p' − φ̂_{j+1/2} φ_p⁻ + φ̂_{j−1/2} φ_p⁺`.
fn apply_gradient(mesh: &DgMesh, phi: &[f64]) -> Vec<f64> {
    let b = &mesh.basis;
    let nl = b.n_loc;
    let n = mesh.n_cells;
    let mut e = vec![0.0; phi.len()];
    for j in 0..n {
        for p in 0..nl {
            e[j * nl + p] = dot(&b.stiff[p * nl..(p + 1) * nl], &phi[j * nl..(j + 1) * nl]);
        }
    }
    for j in 0..n {
        let jp = (j + 1) % n;
        let avg = 0.5
            * (dot(&phi[j * nl..(j + 1) * nl], &b.right) + dot(&phi[jp * nl..(jp + 1) * nl], &b.left));
        for p in 0..nl {
            e[j * nl + p] -= avg * b.right[p];
            e[jp * nl + p] += avg * b.left[p];
        }
    }
    e
}

/// Second LDG equation: `−∫E φ_p' + Ê_{j+1/2} φ_p⁻ − Ê_{j−1/2} φ_p⁺`.
fn apply_divergence(mesh: &DgMesh, e: &[f64], phi: &[f64], beta: f64) -> Vec<f64> {
    let b = &mesh.basis;
    let nl = b.n_loc;
    let n = mesh.n_cells;
    let mut out = vec![0.0; e.len()];
    for j in 0..n {
        for p in 0..nl {
            out[j * nl + p] = -dot(&b.stiff[p * nl..(p + 1) * nl], &e[j * nl..(j + 1) * nl]);
        }
    }
    for j in 0..n {
        let jp = (j + 1) % n;
        let em = dot(&e[j * nl..(j + 1) * nl], &b.right);
        let ep = dot(&e[jp * nl..(jp + 1) * nl], &b.left);
        let pm = dot(&phi[j * nl..(j + 1) * nl], &b.right);
        let pp = dot(&phi[jp * nl..(jp + 1) * nl], &b.left);
        let flux = 0.5 * (em + ep) - beta * (pp - pm);
        for p in 0..nl {
            out[j * nl + p] += flux * b.right[p];
            out[jp * nl + p] -= flux * b.left[p];
        }
    }
    out
}
