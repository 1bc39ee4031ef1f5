//! Dense reference for one Crank-Nicolson step of the one-species hierarchy,
//! degree-2 DG, written from the continuous equations without the library's
//! kernels. Hermite moments of the Fokker-Planck operator:
//!   Q_k = ν [k α_k − √k (u/v) α_{k−1} + √(k(k−1)) (1 − T/v²) α_{k−2}],
//! field term √k (E/v) α_{k−1}, flux g_k = v(√(k+1) α_{k+1} + √k α_{k−1}).

use nalgebra::{DMatrix, DVector};

const NL: usize = 3;
const GAUSS4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

pub struct OracleProblem {
    pub n_cells: usize,
    pub length: f64,
    pub n_modes: usize,
    pub v_th: f64,
    pub eps: f64,
    pub nu: f64,
    pub dt: f64,
    pub delta: f64,
    /// Ion density DG coefficients.
    pub n_i: Vec<f64>,
}

struct Tables {
    h: f64,
    val: [[f64; NL]; 4],
    jw: [f64; 4],
    right: [f64; NL],
    left: [f64; NL],
    /// `∫ φ_r φ_p'` as `[p][r]`.
    stiff: [[f64; NL]; NL],
}

fn tables(h: f64) -> Tables {
    let s = |p: usize| ((2 * p + 1) as f64 / h).sqrt();
    let leg = |x: f64| [1.0, x, 0.5 * (3.0 * x * x - 1.0)];
    let dleg = |x: f64| [0.0, 1.0, 3.0 * x];
    let mut val = [[0.0; NL]; 4];
    let mut dval = [[0.0; NL]; 4];
    let mut jw = [0.0; 4];
    for q in 0..4 {
        let (l, dl) = (leg(GAUSS4_X[q]), dleg(GAUSS4_X[q]));
        for p in 0..NL {
            val[q][p] = s(p) * l[p];
            dval[q][p] = s(p) * dl[p] * 2.0 / h;
        }
        jw[q] = 0.5 * h * GAUSS4_W[q];
    }
    let mut stiff = [[0.0; NL]; NL];
    for p in 0..NL {
        for r in 0..NL {
            stiff[p][r] = (0..4).map(|q| jw[q] * val[q][r] * dval[q][p]).sum();
        }
    }
    Tables {
        h,
        val,
        jw,
        right: [s(0), s(1), s(2)],
        left: [s(0), -s(1), s(2)],
        stiff,
    }
}

impl OracleProblem {
    fn nd(&self) -> usize {
        self.n_cells * NL
    }

    /// Centered weak derivative `w ↦ −∫ w φ' + [ŵ φ]` and the jump matrix
    /// `a ↦ −½ (a⁺ − a⁻)` at each interface, tested against `φ`.
    fn derivative_and_jump(&self, t: &Tables) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n_cells;
        let nd = self.nd();
        let mut d = DMatrix::zeros(nd, nd);
        let mut jmp = DMatrix::zeros(nd, nd);
        for j in 0..n {
            for p in 0..NL {
                for r in 0..NL {
                    d[(j * NL + p, j * NL + r)] -= t.stiff[p][r];
                }
            }
        }
        for j in 0..n {
            let jp = (j + 1) % n;
            // interface value ½(w_j(right) + w_jp(left)) and jump a_jp(left) − a_j(right)
            for p in 0..NL {
                for r in 0..NL {
                    let rows = [(j * NL + p, t.right[p]), (jp * NL + p, -t.left[p])];
                    for (row, test) in rows {
                        d[(row, j * NL + r)] += test * 0.5 * t.right[r];
                        d[(row, jp * NL + r)] += test * 0.5 * t.left[r];
                        jmp[(row, jp * NL + r)] += test * (-0.5) * t.left[r];
                        jmp[(row, j * NL + r)] += test * 0.5 * t.right[r];
                    }
                }
            }
        }
        (d, jmp)
    }

    /// LDG: `E = G φ` with centered flux and `A φ = rhs` with penalty `β [φ]`.
    fn ldg(&self, t: &Tables, beta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let nd = self.nd();
        let n = self.n_cells;
        let (d, _) = self.derivative_and_jump(t);
        // −∂x in weak form is the negative of the centered derivative.
        let g = -&d;
        let mut pen = DMatrix::zeros(nd, nd);
        for j in 0..n {
            let jp = (j + 1) % n;
            for p in 0..NL {
                for r in 0..NL {
                    for (row, test) in [(j * NL + p, t.right[p]), (jp * NL + p, -t.left[p])] {
                        // flux −β (φ⁺ − φ⁻)
                        pen[(row, jp * NL + r)] -= test * beta * t.left[r];
                        pen[(row, j * NL + r)] += test * beta * t.right[r];
                    }
                }
            }
        }
        let a = &d * &g + pen;
        (g, a)
    }

    fn cell_nodes(&self, t: &Tables, c: &[f64]) -> Vec<[f64; 4]> {
        (0..self.n_cells)
            .map(|j| {
                let mut out = [0.0; 4];
                for (o, row) in out.iter_mut().zip(&t.val) {
                    *o = (0..NL).map(|p| c[j * NL + p] * row[p]).sum();
                }
                out
            })
            .collect()
    }

    /// `∫ w φ_r φ_p` block-diagonal matrix for node weights `w`.
    fn weighted_mass(&self, t: &Tables, w: &[[f64; 4]]) -> DMatrix<f64> {
        let nd = self.nd();
        let mut m = DMatrix::zeros(nd, nd);
        for j in 0..self.n_cells {
            for p in 0..NL {
                for r in 0..NL {
                    m[(j * NL + p, j * NL + r)] =
                        (0..4).map(|q| t.jw[q] * w[j][q] * t.val[q][p] * t.val[q][r]).sum();
                }
            }
        }
        m
    }

    /// Spatial operator with coefficients frozen at `mid`.
    fn frozen_operator(&self, t: &Tables, mid: &[f64]) -> DMatrix<f64> {
        let nd = self.nd();
        let nh = self.n_modes;
        let v = self.v_th;
        let (d, jmp) = self.derivative_and_jump(t);
        let (g, a) = self.ldg(t, 1.0);

        // Poisson with zero-mean constraint
        let mut bordered = DMatrix::zeros(nd + 1, nd + 1);
        bordered.view_mut((0, 0), (nd, nd)).copy_from(&a);
        for j in 0..self.n_cells {
            bordered[(j * NL, nd)] = t.h.sqrt();
            bordered[(nd, j * NL)] = t.h.sqrt();
        }
        let mut rhs = DVector::zeros(nd + 1);
        for i in 0..nd {
            rhs[i] = self.n_i[i] - mid[i];
        }
        let sol = bordered.lu().solve(&rhs).expect("poisson");
        let phi = DVector::from_iterator(nd, sol.iter().take(nd).copied());
        let e = &g * phi;

        let e_n = self.cell_nodes(t, e.as_slice());
        let a0 = self.cell_nodes(t, &mid[0..nd]);
        let a1 = self.cell_nodes(t, &mid[nd..2 * nd]);
        let a2 = self.cell_nodes(t, &mid[2 * nd..3 * nd]);
        let mut e_coef = vec![[0.0; 4]; self.n_cells];
        let mut u_coef = vec![[0.0; 4]; self.n_cells];
        let mut t_coef = vec![[0.0; 4]; self.n_cells];
        for j in 0..self.n_cells {
            for q in 0..4 {
                let n = a0[j][q];
                let u = v * a1[j][q] / n;
                let temp = v * v * (a0[j][q] + 2f64.sqrt() * a2[j][q]) / n - u * u;
                e_coef[j][q] = e_n[j][q] / v;
                u_coef[j][q] = -self.nu * u / v;
                t_coef[j][q] = self.nu * (1.0 - temp / (v * v));
            }
        }
        let m_e = self.weighted_mass(t, &e_coef);
        let m_u = self.weighted_mass(t, &u_coef);
        let m_t = self.weighted_mass(t, &t_coef);

        let mut l = DMatrix::zeros(nh * nd, nh * nd);
        for k in 0..nh {
            let kf = k as f64;
            let mut put = |col: usize, m: &DMatrix<f64>| {
                let mut blk = l.view_mut((k * nd, col * nd), (nd, nd));
                blk += m;
            };
            if k + 1 < nh {
                put(k + 1, &(&d * (v * (kf + 1.0).sqrt())));
            }
            if k >= 1 {
                put(k - 1, &(&d * (v * kf.sqrt())));
                put(k, &(&jmp * self.delta));
                put(k, &(DMatrix::identity(nd, nd) * (self.nu * kf)));
                put(k - 1, &(&m_e * kf.sqrt()));
                put(k - 1, &(&m_u * kf.sqrt()));
            }
            if k >= 2 {
                put(k - 2, &(&m_t * (kf * (kf - 1.0)).sqrt()));
            }
        }
        l
    }

    /// Solves `ε(x − α) + Δt L(½(x+α)) ½(x+α) = 0` by Picard with dense LU.
    pub fn step(&self, alpha: &[f64]) -> Vec<f64> {
        let t = tables(self.length / self.n_cells as f64);
        let n = alpha.len();
        let a_old = DVector::from_column_slice(alpha);
        let mut x = a_old.clone();
        let s = 0.5 * self.dt / self.eps;
        for _ in 0..100 {
            let mid: Vec<f64> = (0..n).map(|i| 0.5 * (x[i] + a_old[i])).collect();
            let l = self.frozen_operator(&t, &mid);
            let lhs = DMatrix::identity(n, n) + &l * s;
            let rhs = &a_old - &l * &a_old * s;
            let next = lhs.lu().solve(&rhs).expect("oracle solve");
            let inc = (&next - &x).amax();
            x = next;
            if inc < 1e-14 * x.amax() {
                break;
            }
        }
        x.as_slice().to_vec()
    }

    /// Nonlinear residual `max |ε(x − α) + Δt L(mid) mid|`.
    pub fn residual(&self, alpha: &[f64], x: &[f64]) -> f64 {
        let t = tables(self.length / self.n_cells as f64);
        let mid: Vec<f64> = alpha.iter().zip(x).map(|(a, b)| 0.5 * (a + b)).collect();
        let l = self.frozen_operator(&t, &mid);
        let r = &l * DVector::from_column_slice(&mid) * self.dt
            + (DVector::from_column_slice(x) - DVector::from_column_slice(alpha)) * self.eps;
        r.amax()
    }
}
