//! Fourier collocation Newton solver for `−φ'' + c e^{φ/T} = n_i` on a
//! periodic interval, `∫ c e^{φ/T} = N`, `φ` with zero mean.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

pub struct SpectralBoltzmann {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub c: f64,
    pub length: f64,
}

/// Second-derivative collocation matrix built column by column from the DFT.
fn second_derivative(m: usize, length: f64) -> DMatrix<f64> {
    let mut d2 = DMatrix::zeros(m, m);
    for col in 0..m {
        // derivative of the discrete delta at `col`
        for row in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                // drop the Nyquist mode's sine part by symmetric treatment
                let w = 2.0 * PI * kk / length;
                let phase = 2.0 * PI * (k as f64) * ((row as f64) - (col as f64)) / m as f64;
                s += -w * w * phase.cos();
            }
            d2[(row, col)] = s / m as f64;
        }
    }
    d2
}

pub fn solve(n_i: impl Fn(f64) -> f64, t: f64, length: f64, m: usize) -> SpectralBoltzmann {
    let h = length / m as f64;
    let x: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let ni: Vec<f64> = x.iter().map(|&x| n_i(x)).collect();
    let n_total: f64 = ni.iter().sum::<f64>() * h;
    let d2 = second_derivative(m, length);
    let mut phi = vec![0.0; m];
    let mut c = 1.0;
    for _ in 0..100 {
        let e: Vec<f64> = phi.iter().map(|p| (p / t).exp()).collect();
        c = n_total / (e.iter().sum::<f64>() * h);
        let dens: Vec<f64> = e.iter().map(|v| c * v).collect();
        let lap = &d2 * DVector::from_column_slice(&phi);
        let mut r = DVector::zeros(m + 1);
        for i in 0..m {
            r[i] = -lap[i] + dens[i] - ni[i];
        }
        r[m] = phi.iter().sum::<f64>() * h;
        if r.amax() < 1e-14 {
            break;
        }
        let mut j = DMatrix::zeros(m + 1, m + 1);
        for i in 0..m {
            for k in 0..m {
                j[(i, k)] = -d2[(i, k)] - dens[i] * h * dens[k] / (t * n_total);
            }
            j[(i, i)] += dens[i] / t;
            j[(i, m)] = 1.0;
            j[(m, i)] = h;
        }
        let dx = j.lu().solve(&r).expect("spectral Newton");
        for i in 0..m {
            phi[i] -= dx[i];
        }
    }
    SpectralBoltzmann { x, phi, c, length }
}

impl SpectralBoltzmann {
    /// Trigonometric interpolant at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.phi.len();
        let mut s = 0.0;
        for k in 0..m {
            let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            let (mut re, mut im) = (0.0, 0.0);
            for (j, p) in self.phi.iter().enumerate() {
                let a = -2.0 * PI * (k * j) as f64 / m as f64;
                re += p * a.cos();
                im += p * a.sin();
            }
            let w = if 2 * k == m { 0.5 } else { 1.0 };
            let a = 2.0 * PI * kk * x / self.length;
            s += w * (re * a.cos() - im * a.sin());
            if 2 * k == m {
                let a2 = -a;
                s += w * (re * a2.cos() - im * a2.sin());
            }
        }
        s / m as f64
    }
}
