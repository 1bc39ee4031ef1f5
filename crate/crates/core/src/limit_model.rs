//! Adiabatic limit: energy-constrained Poisson-Boltzmann equilibrium
//! `−φ'' + c exp(φ/T) = n_i`, `∫ c exp(φ/T) = N`, `∫φ = 0`,
//! `N T/2 + ½‖∂_x φ‖² + W_i = 𝔈`.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::dg_space::{constrained_matrix, node_values_into, DgFunction, DgMesh, LdgPoisson};
use crate::error::{Error, Result};

/// Conserved quantities fixing the limit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget {
    pub total_energy: f64,
    pub particle_number: f64,
    pub ion_energy: f64,
}

#[derive(Debug, Clone)]
pub struct LimitState {
    pub phi_bar: DgFunction,
    pub efield: DgFunction,
    pub t_bar: f64,
    pub c: f64,
    pub n_e_bar: DgFunction,
    /// `E(T̄)`.
    pub energy: f64,
    /// `dE/dT` at `T̄` from the last secant pair, if known.
    pub de_dt: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LimitSolver {
    pub poisson: LdgPoisson,
    pub n_i: DgFunction,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub energy_rel_tol: f64,
    pub bracket_tol: f64,
}

/// Potential and Boltzmann density for one temperature.
#[derive(Debug, Clone)]
pub struct BoltzmannSolution {
    pub phi: DgFunction,
    pub c: f64,
    pub n_e: DgFunction,
    pub residual: f64,
    pub iterations: usize,
}

const T_MIN: f64 = 1e-12;
const T_MAX: f64 = 1e8;

impl LimitSolver {
    pub fn new(poisson: LdgPoisson, n_i: DgFunction) -> Self {
        Self {
            poisson,
            n_i,
            newton_tol: 1e-10,
            newton_max_iter: 100,
            energy_rel_tol: 1e-10,
            bracket_tol: 1e-12,
        }
    }

    pub fn mesh(&self) -> &DgMesh {
        &self.poisson.mesh
    }

    /// Boltzmann density at nodes and its projection; `ln c` via log-sum-exp.
    fn boltzmann(&self, phi_nodes: &[f64], t: f64, n_total: f64) -> (Vec<f64>, f64) {
        let mesh = self.mesh();
        let nq = mesh.n_quad();
        let m = phi_nodes.iter().fold(f64::NEG_INFINITY, |a, p| a.max(p / t));
        let mut s = 0.0;
        for j in 0..mesh.n_cells {
            for q in 0..nq {
                s += mesh.basis.jw[q] * (phi_nodes[j * nq + q] / t - m).exp();
            }
        }
        let ln_c = n_total.ln() - m - s.ln();
        let dens = phi_nodes.iter().map(|p| (p / t + ln_c).exp()).collect();
        (dens, ln_c.exp())
    }

    fn project_nodes(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh().n_dofs()];
        crate::dg_space::project_node_values_add(self.mesh(), values, 1.0, &mut out);
        out
    }

    fn residual(&self, phi: &[f64], t: f64, n_total: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let mesh = self.mesh();
        let mut nodes = vec![0.0; mesh.n_cells * mesh.n_quad()];
        node_values_into(mesh, phi, &mut nodes);
        let (dens, c) = self.boltzmann(&nodes, t, n_total);
        let pn = self.project_nodes(&dens);
        let a = &self.poisson.laplacian * DVector::from_column_slice(phi);
        let r: Vec<f64> = (0..phi.len())
            .map(|i| a[i] + pn[i] - self.n_i.coeffs[i])
            .collect();
        (r, dens, c)
    }

    /// Damped Newton from `phi = 0`.
    pub fn solve_poisson_boltzmann(&self, t: f64, n_total: f64) -> Result<BoltzmannSolution> {
        self.solve_poisson_boltzmann_from(t, n_total, None)
    }

    /// Damped Newton from an initial guess (shifted to zero mean).
    pub fn solve_poisson_boltzmann_from(
        &self,
        t: f64,
        n_total: f64,
        guess: Option<&DgFunction>,
    ) -> Result<BoltzmannSolution> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature T = {t}")));
        }
        if !(n_total > 0.0) {
            return Err(Error::InvalidParameter(format!("particle number {n_total}")));
        }
        let mesh = self.mesh().clone();
        let ni_total = self.n_i.integral(&mesh);
        if (ni_total - n_total).abs() > 1e-10 * n_total {
            return Err(Error::Compatibility(ni_total - n_total));
        }
        let nd = mesh.n_dofs();
        let (nl, nq) = (mesh.n_loc(), mesh.n_quad());
        let b = &mesh.basis;
        let mut phi = match guess {
            Some(g) => {
                let mut p = g.coeffs.clone();
                let mean = g.integral(&mesh) / mesh.length;
                let sh = mesh.h.sqrt();
                for j in 0..mesh.n_cells {
                    p[j * nl] -= mean * sh;
                }
                p
            }
            None => vec![0.0; nd],
        };
        let tol = self.newton_tol * self.n_i.l2_norm().max(1.0);
        let (mut r, mut dens, mut c) = self.residual(&phi, t, n_total);
        let mut rn = norm(&r);
        let mut it = 0;
        while rn > tol {
            if it >= self.newton_max_iter {
                return Err(Error::NewtonNonConvergence {
                    iterations: it,
                    residual: rn,
                });
            }
            it += 1;
            // J = A + M_{n/T} − P Pᵀ/(N T)
            let mut jac = DMatrix::zeros(nd, nd);
            let mut pvec = vec![0.0; nd];
            for j in 0..mesh.n_cells {
                for q in 0..nq {
                    let nqv = dens[j * nq + q] * b.jw[q];
                    for p in 0..nl {
                        let vp = b.val[q * nl + p];
                        pvec[j * nl + p] += nqv * vp;
                        for s in 0..nl {
                            jac[(j * nl + p, j * nl + s)] += nqv / t * vp * b.val[q * nl + s];
                        }
                    }
                }
            }
            let pv = DVector::from_vec(pvec);
            jac -= (&pv * pv.transpose()) / (n_total * t);
            let full = constrained_matrix(&mesh, &self.poisson.laplacian, Some(&jac));
            let mut rhs = DVector::zeros(nd + 1);
            for i in 0..nd {
                rhs[i] = -r[i];
            }
            rhs[nd] = -phi_integral(&mesh, &phi);
            let step = full
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::SingularSystem("Poisson-Boltzmann Jacobian".into()))?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=30 {
                let trial: Vec<f64> = (0..nd).map(|i| phi[i] + lambda * step[i]).collect();
                let (rt, dt, ct) = self.residual(&trial, t, n_total);
                let rtn = norm(&rt);
                if rtn.is_finite() && rtn < rn {
                    phi = trial;
                    r = rt;
                    dens = dt;
                    c = ct;
                    rn = rtn;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonNonConvergence {
                    iterations: it,
                    residual: rn,
                });
            }
        }
        let n_e = DgFunction::from_coeffs(&mesh, self.project_nodes(&dens));
        Ok(BoltzmannSolution {
            phi: DgFunction::from_coeffs(&mesh, phi),
            c,
            n_e,
            residual: rn,
            iterations: it,
        })
    }

    /// `E(T) = N T/2 + U(φ) + W_i` together with the solution it used.
    pub fn energy_of_temperature_with(
        &self,
        budget: &EnergyBudget,
        t: f64,
        guess: Option<&DgFunction>,
    ) -> Result<(f64, BoltzmannSolution)> {
        let sol = self.solve_poisson_boltzmann_from(t, budget.particle_number, guess)?;
        let field = self.poisson.field_energy(&sol.phi);
        Ok((0.5 * budget.particle_number * t + field + budget.ion_energy, sol))
    }

    pub fn energy_of_temperature(&self, budget: &EnergyBudget, t: f64) -> Result<f64> {
        Ok(self.energy_of_temperature_with(budget, t, None)?.0)
    }

    fn state_from(&self, t: f64, energy: f64, sol: BoltzmannSolution, de_dt: Option<f64>) -> LimitState {
        let efield = self.poisson.gradient(&sol.phi);
        LimitState {
            phi_bar: sol.phi,
            efield,
            t_bar: t,
            c: sol.c,
            n_e_bar: sol.n_e,
            energy,
            de_dt,
        }
    }

    /// Solves `E(T̄) = 𝔈` by a geometric bracket from `T = 1` and safeguarded secant steps.
    pub fn find_limit_temperature(&self, budget: &EnergyBudget) -> Result<LimitState> {
        let target = budget.total_energy;
        if !(target > budget.ion_energy) {
            return Err(Error::BracketFailure(format!(
                "total energy {target} does not exceed ion energy {}",
                budget.ion_energy
            )));
        }
        let mut t = 1.0;
        let (mut e, mut sol) = self.energy_of_temperature_with(budget, t, None)?;
        let (mut lo, mut hi);
        if e < target {
            lo = (t, e, sol.phi.clone());
            loop {
                t *= 4.0;
                if t > T_MAX {
                    return Err(Error::BracketFailure(format!("E({T_MAX:e}) < {target}")));
                }
                let g = sol.phi.clone();
                (e, sol) = self.energy_of_temperature_with(budget, t, Some(&g))?;
                if e >= target {
                    hi = (t, e, sol.phi.clone());
                    break;
                }
                lo = (t, e, sol.phi.clone());
            }
        } else {
            hi = (t, e, sol.phi.clone());
            loop {
                t /= 4.0;
                if t < T_MIN {
                    return Err(Error::BracketFailure(format!("E({T_MIN:e}) > {target}")));
                }
                let g = sol.phi.clone();
                (e, sol) = match self.energy_of_temperature_with(budget, t, Some(&g)) {
                    Ok(v) => v,
                    Err(Error::NewtonNonConvergence { .. }) => {
                        return Err(Error::BracketFailure(format!(
                            "Poisson-Boltzmann solve failed at T = {t:e} while bracketing"
                        )))
                    }
                    Err(err) => return Err(err),
                };
                if e <= target {
                    lo = (t, e, sol.phi.clone());
                    break;
                }
                hi = (t, e, sol.phi.clone());
            }
        }
        if (e - target).abs() < self.energy_rel_tol * target {
            return Ok(self.state_from(t, e, sol, None));
        }
        // Illinois-modified regula falsi: when the same end is replaced twice in
        // a row the function value kept at the other end is halved.
        let mut last: i32 = 0;
        let (mut fl, mut fh) = (lo.1 - target, hi.1 - target);
        for _ in 0..200 {
            let (tl, th) = (lo.0, hi.0);
            let mut tn = tl - fl * (th - tl) / (fh - fl);
            if !(tn > tl && tn < th) {
                tn = 0.5 * (tl + th);
            }
            let guess = if tn - tl < th - tn { lo.2.clone() } else { hi.2.clone() };
            let (en, soln) = self.energy_of_temperature_with(budget, tn, Some(&guess))?;
            let slope = (hi.1 - lo.1) / (th - tl);
            if (en - target).abs() < self.energy_rel_tol * target || th - tl < self.bracket_tol {
                debug!("limit temperature {tn} (E = {en})");
                return Ok(self.state_from(tn, en, soln, Some(slope)));
            }
            if en < target {
                lo = (tn, en, soln.phi);
                fl = en - target;
                if last == -1 {
                    fh *= 0.5;
                }
                last = -1;
            } else {
                hi = (tn, en, soln.phi);
                fh = en - target;
                if last == 1 {
                    fl *= 0.5;
                }
                last = 1;
            }
        }
        Err(Error::BracketFailure("secant/bisection did not converge".into()))
    }

    /// Root solve starting from a previous state (small changes of `W_i`);
    /// falls back to the bracketed solve when the secant iteration stalls.
    pub fn find_limit_temperature_warm(&self, budget: &EnergyBudget, prev: &LimitState) -> Result<LimitState> {
        let target = budget.total_energy;
        let slope0 = prev
            .de_dt
            .unwrap_or(0.5 * budget.particle_number)
            .max(0.5 * budget.particle_number * 1e-3);
        let t0 = prev.t_bar;
        let (e0, s0) = self.energy_of_temperature_with(budget, t0, Some(&prev.phi_bar))?;
        if (e0 - target).abs() < self.energy_rel_tol * target {
            return Ok(self.state_from(t0, e0, s0, prev.de_dt));
        }
        let (mut ta, mut ea, mut sa) = (t0, e0, s0);
        let mut tb = t0 - (e0 - target) / slope0;
        for _ in 0..20 {
            if !(tb > 0.0 && tb.is_finite()) {
                break;
            }
            let (eb, sb) = self.energy_of_temperature_with(budget, tb, Some(&sa.phi))?;
            let slope = if tb != ta { (eb - ea) / (tb - ta) } else { slope0 };
            if (eb - target).abs() < self.energy_rel_tol * target {
                let s = if slope > 0.0 { Some(slope) } else { prev.de_dt };
                return Ok(self.state_from(tb, eb, sb, s));
            }
            if !(slope > 0.0) {
                break;
            }
            let tn = tb - (eb - target) / slope;
            (ta, ea, sa) = (tb, eb, sb);
            tb = tn;
        }
        debug!("warm limit solve fell back to bracketing");
        self.find_limit_temperature(budget)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn phi_integral(mesh: &DgMesh, phi: &[f64]) -> f64 {
    let nl = mesh.n_loc();
    (0..mesh.n_cells).map(|j| phi[j * nl]).sum::<f64>() * mesh.h.sqrt()
}

/// New scaling velocity from the limit state and `v_th'/v_th` from the
/// difference with the previous step, `(v^{m+1} − v^m)/(Δt v^{m+1/2})`.
pub fn vth_update(
    solver: &LimitSolver,
    budget: &EnergyBudget,
    prev: &LimitState,
    v_prev: f64,
    dt: f64,
) -> Result<(LimitState, f64, f64)> {
    let st = solver.find_limit_temperature_warm(budget, prev)?;
    let v = st.t_bar.sqrt();
    let r = if dt > 0.0 {
        (v - v_prev) / (dt * 0.5 * (v + v_prev))
    } else {
        0.0
    };
    Ok((st, v, r))
}
