//! Hermite functions evaluated independently of the library recurrences.

use vpfp::hermite_basis::HermiteBasis;

/// Normalized probabilists' Hermite polynomials by their three-term recurrence.
pub fn hermite_j(n: usize, s: f64) -> Vec<f64> {
    let mut j = vec![0.0; n];
    j[0] = 1.0;
    if n > 1 {
        j[1] = s;
    }
    for k in 1..n - 1 {
        j[k + 1] = (s * j[k] - (k as f64).sqrt() * j[k - 1]) / ((k + 1) as f64).sqrt();
    }
    j
}

/// `∫ ψ_a(v) J_b(v/v_th) dv` by the trapezoid rule, exact to rounding for these integrands.
pub fn overlap(basis: &HermiteBasis, a: usize, b: usize) -> f64 {
    let v = basis.v_th;
    let n = 9000;
    let (lo, hi) = (-45.0 * v, 45.0 * v);
    let dv = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let x = lo + i as f64 * dv;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * basis.eval(a, x) * hermite_j(b + 1, x / v)[b]
        })
        .sum::<f64>()
        * dv
}

/// Central difference of `ψ_k` minus the lowering identity `ψ_k' = −sqrt(k+1)/v_th ψ_{k+1}`.
pub fn derivative_defect(basis: &HermiteBasis, k: usize, s: f64) -> f64 {
    let v = s * basis.v_th;
    let h = 1e-4 * basis.v_th;
    let fd = (basis.eval(k, v + h) - basis.eval(k, v - h)) / (2.0 * h);
    let exact = -((k + 1) as f64).sqrt() / basis.v_th * basis.eval(k + 1, v);
    (fd - exact).abs()
}
