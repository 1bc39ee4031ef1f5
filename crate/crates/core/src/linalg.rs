//! Matrix-free restarted GMRES.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    /// Stop when `‖b − A x‖ ≤ rel_tol ‖b‖ + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iter: 400,
            rel_tol: 1e-12,
            abs_tol: 1e-300,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresReport {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from the given `x`; `apply(v, out)` writes `A v`.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<GmresReport> {
    let n = b.len();
    let bnorm = norm(b);
    let target = opts.rel_tol * bnorm + opts.abs_tol;
    let m = opts.restart.max(1);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    let mut total = 0;
    loop {
        apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        if beta <= target || !beta.is_finite() {
            if !beta.is_finite() {
                return Err(Error::LinearSolve("non-finite GMRES residual".into()));
            }
            return Ok(GmresReport {
                iterations: total,
                residual: beta,
            });
        }
        if total >= opts.max_iter {
            return Err(Error::LinearSolve(format!(
                "GMRES stalled after {total} iterations, residual {beta:e} (target {target:e})"
            )));
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            apply(&basis[k], &mut w);
            for i in 0..=k {
                let hik = dot(&w, &basis[i]);
                h[i][k] = hik;
                for (wv, bv) in w.iter_mut().zip(&basis[i]) {
                    *wv -= hik * bv;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= target || hn == 0.0 || total >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, bv) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * bv;
            }
        }
    }
}
