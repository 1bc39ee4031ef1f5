//! Mesh-refinement errors for the LDG Poisson solver and DG advection.

use std::f64::consts::PI;

use vpfp::dg_space::{transport_residual_add, DgFunction, DgMesh, LdgPoisson};
use vpfp::quadrature::GaussLegendre;

pub const MESHES: [usize; 4] = [8, 16, 32, 64];
const L: f64 = 12.0;

/// `‖u_h − u‖_{L²}` with a 7-point rule per cell.
pub fn l2_error(mesh: &DgMesh, uh: &DgFunction, u: impl Fn(f64) -> f64) -> f64 {
    let g = GaussLegendre::new(7);
    let mut s = 0.0;
    for j in 0..mesh.n_cells {
        let a = mesh.cell_left(j);
        s += g.integrate(a, a + mesh.h, |x| (uh.eval(mesh, x.min(a + mesh.h * (1.0 - 1e-14))) - u(x)).powi(2));
    }
    s.sqrt()
}

pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Errors of `φ` and `E = −φ'` for `−φ'' = ρ`, `φ = sin(kx) + 0.3 cos(2kx)`.
pub fn poisson_errors() -> (Vec<f64>, Vec<f64>) {
    let k = 2.0 * PI / L;
    let phi = |x: f64| (k * x).sin() + 0.3 * (2.0 * k * x).cos();
    let e = |x: f64| -k * (k * x).cos() + 0.6 * k * (2.0 * k * x).sin();
    let rho = |x: f64| k * k * (k * x).sin() + 1.2 * k * k * (2.0 * k * x).cos();
    let mut ep = Vec::new();
    let mut ee = Vec::new();
    for n in MESHES {
        let mesh = DgMesh::new(n, L, 2).unwrap();
        let sol = LdgPoisson::new(&mesh).unwrap().solve(&DgFunction::project(&mesh, rho)).unwrap();
        ep.push(l2_error(&mesh, &sol.phi, phi));
        ee.push(l2_error(&mesh, &sol.efield, e));
    }
    (ep, ee)
}

/// `a_t + c a_x = 0` with the Lax-Friedrichs residual (`δ = c`, upwind), RK4 to `t = 1`.
pub fn advection_errors() -> Vec<f64> {
    let k = 2.0 * PI / L;
    let c = 1.3;
    let exact = |x: f64, t: f64| (k * (x - c * t)).sin() + 0.5 * (2.0 * k * (x - c * t)).cos();
    MESHES
        .iter()
        .map(|&n| {
            let mesh = DgMesh::new(n, L, 2).unwrap();
            let mut a = DgFunction::project(&mesh, |x| exact(x, 0.0)).coeffs;
            let rhs = |a: &[f64]| {
                let g: Vec<f64> = a.iter().map(|v| c * v).collect();
                let mut out = vec![0.0; a.len()];
                transport_residual_add(&mesh, &g, a, 1, c, -1.0, &mut out);
                out
            };
            let steps = 40 * n;
            let dt = 1.0 / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(&a);
                let y: Vec<f64> = a.iter().zip(&k1).map(|(a, k)| a + 0.5 * dt * k).collect();
                let k2 = rhs(&y);
                let y: Vec<f64> = a.iter().zip(&k2).map(|(a, k)| a + 0.5 * dt * k).collect();
                let k3 = rhs(&y);
                let y: Vec<f64> = a.iter().zip(&k3).map(|(a, k)| a + dt * k).collect();
                let k4 = rhs(&y);
                for i in 0..a.len() {
                    a[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            l2_error(&mesh, &DgFunction::from_coeffs(&mesh, a), |x| exact(x, 1.0))
        })
        .collect()
}
