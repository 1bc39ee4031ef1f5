//! Fluid moments, mixed electron-ion quantities and the Hermite-space form of
//! the Fokker-Planck and inertial source terms.

use crate::error::{Error, Result};
use crate::hermite_basis::HermiteBasis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub n: f64,
    pub u: f64,
    pub t: f64,
    pub w: f64,
}

impl MomentSet {
    /// Maxwellian moments, with `w = n T/2 + n u²/2`.
    pub fn maxwellian(n: f64, u: f64, t: f64) -> Self {
        Self {
            n,
            u,
            t,
            w: 0.5 * n * t + 0.5 * n * u * u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedQuantities {
    pub u_ei: f64,
    pub t_ei: f64,
    pub eps: f64,
    pub nu_ee: f64,
    pub nu_ei: f64,
}

/// `n = α_0`, `u = v_th α_1/α_0`, `T = v_th²(1 + √2 α_2/α_0 − (α_1/α_0)²)`,
/// `w = v_th²(α_0 + √2 α_2)/2`.
pub fn moments_from_coefficients(basis: &HermiteBasis, a0: f64, a1: f64, a2: f64) -> Result<MomentSet> {
    if !(a0 > 0.0) {
        return Err(Error::NonPositiveDensity {
            cell: usize::MAX,
            node: usize::MAX,
            value: a0,
        });
    }
    Ok(moments_unchecked(basis.v_th, a0, a1, a2))
}

/// Same formulas without the density check.
#[inline]
pub fn moments_unchecked(v_th: f64, a0: f64, a1: f64, a2: f64) -> MomentSet {
    let r1 = a1 / a0;
    let v2 = v_th * v_th;
    MomentSet {
        n: a0,
        u: v_th * r1,
        t: v2 * (1.0 + std::f64::consts::SQRT_2 * a2 / a0 - r1 * r1),
        w: 0.5 * v2 * (a0 + std::f64::consts::SQRT_2 * a2),
    }
}

/// `u_ei = (u_e + ε u_i)/2`, `T_ei = (T_e + ε² T_i + (u_e − ε u_i)²/2)/(1 + ε²)`.
pub fn mixed_quantities(e: &MomentSet, i: &MomentSet, eps: f64, nu_ee: f64, nu_ei: f64) -> MixedQuantities {
    let du = e.u - eps * i.u;
    MixedQuantities {
        u_ei: 0.5 * (e.u + eps * i.u),
        t_ei: (e.t + eps * eps * i.t + 0.5 * du * du) / (1.0 + eps * eps),
        eps,
        nu_ee,
        nu_ei,
    }
}

#[inline]
fn at(alpha: &[f64], k: isize) -> f64 {
    if k < 0 {
        0.0
    } else {
        alpha.get(k as usize).copied().unwrap_or(0.0)
    }
}

/// `Q_k = (ν_ee+ν_ei) k α_k − √k (ν_ee u + ν_ei u_ei)/v_th α_{k−1}
///        + (ν_ee[1 − T/v_th²] + ν_ei[1 − T_ei/v_th²]) √((k−1)k) α_{k−2}`.
pub fn collision_source(basis: &HermiteBasis, alpha: &[f64], mix: &MixedQuantities, moments: &MomentSet, k: usize) -> f64 {
    let v = basis.v_th;
    let kf = k as f64;
    let ki = k as isize;
    let (ne, ni) = (mix.nu_ee, mix.nu_ei);
    (ne + ni) * kf * at(alpha, ki)
        - kf.sqrt() * (ne * moments.u + ni * mix.u_ei) / v * at(alpha, ki - 1)
        + (ne * (1.0 - moments.t / (v * v)) + ni * (1.0 - mix.t_ei / (v * v)))
            * ((kf - 1.0).max(0.0) * kf).sqrt()
            * at(alpha, ki - 2)
}

/// `I_k = (v_th'/v_th)(k α_k + √((k−1)k) α_{k−2})`.
pub fn inertial_source(vth_dot_over_vth: f64, alpha: &[f64], k: usize) -> f64 {
    let kf = k as f64;
    let ki = k as isize;
    vth_dot_over_vth * (kf * at(alpha, ki) + ((kf - 1.0).max(0.0) * kf).sqrt() * at(alpha, ki - 2))
}

/// Source of the Hermite hierarchy at one point with the nonlinear
/// coefficients frozen, `s_k = ε I_k + √k (E/v_th) α_{k−1} + Q_k`, written as
/// `diag·k α_k + sub1·√k α_{k−1} + sub2·√((k−1)k) α_{k−2}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrozenSource {
    pub diag: f64,
    pub sub1: f64,
    pub sub2: f64,
}

impl FrozenSource {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eps: f64,
        vth_dot_over_vth: f64,
        efield: f64,
        v_th: f64,
        moments: &MomentSet,
        mix: &MixedQuantities,
    ) -> Self {
        let (ne, ni) = (mix.nu_ee, mix.nu_ei);
        let v2 = v_th * v_th;
        Self {
            diag: eps * vth_dot_over_vth + ne + ni,
            sub1: (efield - ne * moments.u - ni * mix.u_ei) / v_th,
            sub2: eps * vth_dot_over_vth + ne * (1.0 - moments.t / v2) + ni * (1.0 - mix.t_ei / v2),
        }
    }

    #[inline]
    pub fn apply(&self, k: usize, a_k: f64, a_km1: f64, a_km2: f64) -> f64 {
        let kf = k as f64;
        let mut s = self.diag * kf * a_k;
        if k >= 1 {
            s += self.sub1 * kf.sqrt() * a_km1;
        }
        if k >= 2 {
            s += self.sub2 * ((kf - 1.0) * kf).sqrt() * a_km2;
        }
        s
    }
}

/// Uniform trapezoid grid on `[−half_width, half_width]`.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(half_width: f64, n: usize) -> Self {
        assert!(n >= 2);
        let dv = 2.0 * half_width / (n - 1) as f64;
        let points = (0..n).map(|i| -half_width + i as f64 * dv).collect();
        let mut weights = vec![dv; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Self { points, weights }
    }
}

/// Electron part of the entropy dissipation at one point `x`:
/// `∫ ν_ee (T ∂_v f + (v−u) f)²/(T f) + ν_ei (T_ei ∂_v f + (v−u_ei) f)²/(T_ei f) dv`.
/// Points where the reconstruction is not positive are skipped and counted.
pub fn entropy_dissipation_diagnostic(
    basis: &HermiteBasis,
    alpha: &[f64],
    moments: &MomentSet,
    mix: &MixedQuantities,
    grid: &VelocityGrid,
) -> (f64, usize) {
    let n = alpha.len();
    let mut total = 0.0;
    let mut excluded = 0;
    for (&v, &w) in grid.points.iter().zip(&grid.weights) {
        let psi = basis.eval_upto(n + 1, v);
        let f: f64 = alpha.iter().zip(&psi).map(|(a, p)| a * p).sum();
        if f <= 0.0 {
            excluded += 1;
            continue;
        }
        let df: f64 = -alpha
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64).sqrt() * psi[k + 1])
            .sum::<f64>()
            / basis.v_th;
        let mut dens = 0.0;
        if mix.nu_ee > 0.0 {
            let g = moments.t * df + (v - moments.u) * f;
            dens += mix.nu_ee * g * g / (moments.t * f);
        }
        if mix.nu_ei > 0.0 {
            let g = mix.t_ei * df + (v - mix.u_ei) * f;
            dens += mix.nu_ei * g * g / (mix.t_ei * f);
        }
        total += w * dens;
    }
    (total, excluded)
}
