//! Crank-Nicolson time stepping of the Hermite-DG hierarchy
//!
//! `ε ∂_t α_k + ∂_x g_k + ε I_k + √k (E/v_th) α_{k−1} + Q_k = 0`,
//!
//! with Picard iteration on the midpoint nonlinearity and the adaptive
//! truncation of high Hermite modes.

use log::{debug, warn};

use crate::collisions::{mixed_quantities, moments_unchecked, FrozenSource, MomentSet};
use crate::dg_space::{
    node_values_into, project_node_values_add, transport_residual_add, DgFunction, DgMesh, FieldSolution,
    LdgPoisson,
};
use crate::error::{Error, Result};
use crate::hermite_basis::{project_initial_data, HermiteBasis, HermiteCoefficients};
use crate::limit_model::{EnergyBudget, LimitSolver, LimitState};
use crate::linalg::{gmres, GmresOptions};
use crate::scenarios::{
    initial_electron_distribution, ion_background, momentum_admissibility_check, IonModel, ScenarioConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub eps: f64,
    pub nu_ee: f64,
    pub nu_ei: f64,
    /// Lax-Friedrichs viscosity; `v_th sqrt(N_H)` when `None`.
    pub delta_override: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub adaptive_enabled: bool,
    pub adaptive_threshold: f64,
    pub adaptive_min_mode: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub time: f64,
    pub step: usize,
    pub basis: HermiteBasis,
    pub coeffs: HermiteCoefficients,
    pub field: FieldSolution,
    /// `T_i(t)` for Maxwellian ions.
    pub ion_temperature: Option<f64>,
    pub vth_dot_over_vth: f64,
    /// Limit state behind the current `v_th`.
    pub limit: LimitState,
    pub budget: EnergyBudget,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepReport {
    pub picard_iterations: usize,
    pub increment: f64,
    pub gmres_iterations: usize,
}

/// Everything that stays fixed during a run.
#[derive(Debug, Clone)]
pub struct Solver {
    pub mesh: DgMesh,
    pub poisson: LdgPoisson,
    pub limit_solver: LimitSolver,
    pub ions: IonModel,
    pub params: PhysicsParams,
    pub cfg: TimeStepperConfig,
    /// Electron particle number `𝔫_e`.
    pub n_e_total: f64,
    pub gmres: GmresOptions,
}

impl Solver {
    /// Builds the solver and the initial state of a scenario: projection with a
    /// self-consistent `v_th = sqrt(T̄)`, momentum check, Poisson solve.
    pub fn initialize(config: &ScenarioConfig) -> Result<(Solver, SimulationState)> {
        config.validate()?;
        let s = &config.scenario;
        let mesh = DgMesh::new(config.mesh.nx, s.length, config.mesh.order)?;
        let poisson = LdgPoisson::with_beta(&mesh, config.mesh.ldg_beta.value(mesh.h))?;
        let ions = ion_background(config, &mesh);
        let n_i = ions.density().clone();
        let n_total = n_i.integral(&mesh);
        let mut limit_solver = LimitSolver::new(poisson.clone(), n_i.clone());
        limit_solver.energy_rel_tol = 1e-13;
        let f0 = initial_electron_distribution(config);
        let nh = config.hermite.nh;
        let ti0 = match ions {
            IonModel::Maxwellian { ti0, .. } => Some(ti0),
            IonModel::Fixed { .. } => None,
        };

        let project = |v: f64| -> Result<(HermiteCoefficients, EnergyBudget)> {
            let basis = HermiteBasis::new(nh, v)?;
            let mut c = project_initial_data(&basis, &mesh, &f0)?;
            if s.neutralize {
                let scale = n_total / c.mode_function(&mesh, 0).integral(&mesh);
                c.data.iter_mut().for_each(|a| *a *= scale);
            }
            let ne = c.mode_function(&mesh, 0).integral(&mesh);
            let field = poisson.solve(&n_i.sub(&c.mode_function(&mesh, 0)))?;
            let w_i = ti0.map_or(0.0, |t| 0.5 * ne * t);
            let total = kinetic_energy(&mesh, v, &c) + poisson.field_energy(&field.phi) + w_i;
            Ok((
                c,
                EnergyBudget {
                    total_energy: total,
                    particle_number: ne,
                    ion_energy: w_i,
                },
            ))
        };

        let mut v = 1.0;
        let (mut coeffs, mut budget) = project(v)?;
        let mut limit = limit_solver.find_limit_temperature(&budget)?;
        for _ in 0..8 {
            let v_new = limit.t_bar.sqrt();
            let done = (v_new - v).abs() <= 1e-15 * v_new;
            v = v_new;
            (coeffs, budget) = project(v)?;
            limit = limit_solver.find_limit_temperature_warm(&budget, &limit)?;
            if done {
                break;
            }
        }
        // keep the scaling velocity and the limit state exactly paired
        let v = limit.t_bar.sqrt();
        let basis = HermiteBasis::new(nh, v)?;
        momentum_admissibility_check(config, &mesh, v, &coeffs)?;
        let field = poisson.solve(&n_i.sub(&coeffs.mode_function(&mesh, 0)))?;
        let n_e_total = budget.particle_number;
        let solver = Solver {
            mesh,
            poisson,
            limit_solver,
            ions,
            params: PhysicsParams {
                eps: s.eps,
                nu_ee: s.nu_ee,
                nu_ei: s.nu_ei,
                delta_override: config.transport.delta,
            },
            cfg: TimeStepperConfig {
                dt: config.dt(),
                t_end: config.t_end(),
                picard_tol: config.time.picard_tol,
                picard_max_iters: config.time.picard_max_iters,
                adaptive_enabled: config.adaptive.enabled,
                adaptive_threshold: config.adaptive.threshold,
                adaptive_min_mode: config.adaptive.min_mode,
            },
            n_e_total,
            gmres: GmresOptions::default(),
        };
        let mut state = SimulationState {
            time: 0.0,
            step: 0,
            basis,
            coeffs,
            field,
            ion_temperature: ti0,
            vth_dot_over_vth: 0.0,
            limit,
            budget,
        };
        if solver.cfg.adaptive_enabled {
            adaptive_mask_update(&solver.mesh, &mut state.coeffs, &solver.cfg);
        }
        Ok((solver, state))
    }

    pub fn n_i(&self) -> &DgFunction {
        self.ions.density()
    }

    pub fn delta(&self, v_th: f64, n_modes: usize) -> f64 {
        self.params
            .delta_override
            .unwrap_or(v_th * (n_modes as f64).sqrt())
    }

    /// Field from the current electron density.
    pub fn solve_field(&self, alpha0: &[f64]) -> Result<FieldSolution> {
        let mut rhs = self.n_i().clone();
        for (r, a) in rhs.coeffs.iter_mut().zip(alpha0) {
            *r -= a;
        }
        self.poisson.solve(&rhs)
    }

    /// Number of steps needed to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.cfg.t_end / self.cfg.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// One Crank-Nicolson step with Picard iteration.
    pub fn crank_nicolson_step(&self, state: &mut SimulationState) -> Result<StepReport> {
        let mesh = &self.mesh;
        let nh = state.basis.n_modes;
        let nd = mesh.n_dofs();
        let nq = mesh.n_quad();
        let npts = mesh.n_cells * nq;
        let (dt, eps) = (self.cfg.dt, self.params.eps);
        let scale = 0.5 * dt / eps;
        let active = state.coeffs.active.clone();
        let a_old = state.coeffs.data.clone();
        let mut a_new = a_old.clone();
        let v_old = state.basis.v_th;
        let mut v_new = v_old;
        let ti_old = state.ion_temperature;
        let mut ti_new = ti_old;
        let mut limit_new = state.limit.clone();
        let mut mid = vec![0.0; a_old.len()];
        let mut node_buf = vec![0.0; npts];
        let mut moments_nodes = vec![[0.0f64; 3]; npts];
        let mut report = StepReport::default();
        let mut negative_t = false;

        for it in 1..=self.cfg.picard_max_iters {
            for i in 0..mid.len() {
                mid[i] = 0.5 * (a_old[i] + a_new[i]);
            }
            let v_mid = 0.5 * (v_old + v_new);
            let r = if dt > 0.0 { (v_new - v_old) / (dt * v_mid) } else { 0.0 };
            let ti_mid = match (ti_old, ti_new) {
                (Some(a), Some(b)) => Some(0.5 * (a + b)),
                _ => None,
            };
            let field = self.solve_field(&mid[0..nd])?;
            let mut e_nodes = vec![0.0; npts];
            node_values_into(mesh, &field.efield.coeffs, &mut e_nodes);
            for k in 0..3 {
                node_values_into(mesh, &mid[k * nd..(k + 1) * nd], &mut node_buf);
                for (p, v) in node_buf.iter().enumerate() {
                    moments_nodes[p][k] = *v;
                }
            }
            let ni_nodes = self.n_i().node_values(mesh);
            let mut sources = Vec::with_capacity(npts);
            let mut q2ei = 0.0;
            for p in 0..npts {
                let [a0, a1, a2] = moments_nodes[p];
                if !(a0 > 0.0) {
                    return Err(Error::NonPositiveDensity {
                        cell: p / nq,
                        node: p % nq,
                        value: a0,
                    });
                }
                let m = moments_unchecked(v_mid, a0, a1, a2);
                if m.t < 0.0 {
                    negative_t = true;
                }
                let ion = MomentSet::maxwellian(ni_nodes[p], 0.0, ti_mid.unwrap_or(m.t));
                let mix = mixed_quantities(&m, &ion, eps, self.params.nu_ee, self.params.nu_ei);
                sources.push(FrozenSource::new(eps, r, e_nodes[p], v_mid, &m, &mix));
                if ti_mid.is_some() {
                    let q = self.params.nu_ei
                        * (2.0 * a2 - std::f64::consts::SQRT_2 * mix.u_ei / v_mid * a1
                            + (1.0 - mix.t_ei / (v_mid * v_mid)) * std::f64::consts::SQRT_2 * a0);
                    q2ei += mesh.basis.jw[p % nq] * q;
                }
            }
            let delta = self.delta(v_mid, nh);
            let mut op = FrozenOperator::new(mesh, nh, &active, v_mid, delta, &sources);
            // rhs = α^m − (Δt/2ε) L α^m
            let mut rhs = vec![0.0; a_old.len()];
            op.apply(&a_old, -scale, &mut rhs);
            let mut x = a_new.clone();
            let rep = gmres(|v, out| op.apply(v, scale, out), &rhs, &mut x, &self.gmres)?;
            report.gmres_iterations += rep.iterations;

            let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let mut inc = x
                .iter()
                .zip(&a_new)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / xmax;
            a_new = x;

            if let (Some(t0), Some(tprev)) = (ti_old, ti_new) {
                let t_next = t0
                    + dt / (eps * self.n_e_total) * std::f64::consts::SQRT_2 * v_mid * v_mid * q2ei;
                inc = inc.max((t_next - tprev).abs() / t0.abs().max(f64::MIN_POSITIVE));
                ti_new = Some(t_next);
                let budget = EnergyBudget {
                    ion_energy: 0.5 * self.n_e_total * t_next,
                    ..state.budget
                };
                limit_new = self.limit_solver.find_limit_temperature_warm(&budget, &limit_new)?;
                let v_next = limit_new.t_bar.sqrt();
                inc = inc.max((v_next - v_new).abs() / v_next);
                v_new = v_next;
            }
            report.picard_iterations = it;
            report.increment = inc;
            if !inc.is_finite() {
                return Err(Error::PicardDivergence {
                    step: state.step + 1,
                    increment: inc,
                });
            }
            if inc <= self.cfg.picard_tol {
                break;
            }
            if it == self.cfg.picard_max_iters {
                return Err(Error::PicardDivergence {
                    step: state.step + 1,
                    increment: inc,
                });
            }
        }
        if negative_t {
            warn!("negative local temperature at step {}", state.step + 1);
        }
        let v_mid = 0.5 * (v_old + v_new);
        state.vth_dot_over_vth = if dt > 0.0 { (v_new - v_old) / (dt * v_mid) } else { 0.0 };
        state.coeffs.data = a_new;
        state.basis = HermiteBasis::new(nh, v_new)?;
        state.ion_temperature = ti_new;
        if let Some(t) = ti_new {
            state.budget.ion_energy = 0.5 * self.n_e_total * t;
        }
        state.limit = limit_new;
        state.step += 1;
        state.time = state.step as f64 * dt;
        if self.cfg.adaptive_enabled {
            adaptive_mask_update(mesh, &mut state.coeffs, &self.cfg);
        }
        state.field = self.solve_field(state.coeffs.mode(0))?;
        debug!(
            "step {} t={:.6} picard={} gmres={} inc={:.2e}",
            state.step, state.time, report.picard_iterations, report.gmres_iterations, report.increment
        );
        Ok(report)
    }

    /// Advances to `t_end`, calling `observe` on the initial state and after every step.
    pub fn run(
        &self,
        state: &mut SimulationState,
        mut observe: impl FnMut(&Solver, &SimulationState, Option<&StepReport>) -> Result<()>,
    ) -> Result<()> {
        observe(self, state, None)?;
        let n = self.n_steps();
        while state.step < n {
            let rep = self.crank_nicolson_step(state)?;
            observe(self, state, Some(&rep))?;
        }
        Ok(())
    }
}

/// `½ v_th² ∫ (α_0 + √2 α_2) dx`.
pub fn kinetic_energy(mesh: &DgMesh, v_th: f64, c: &HermiteCoefficients) -> f64 {
    let a0 = c.mode_function(mesh, 0).integral(mesh);
    let a2 = c.mode_function(mesh, 2).integral(mesh);
    0.5 * v_th * v_th * (a0 + std::f64::consts::SQRT_2 * a2)
}

/// Applies `x ↦ x + s L x` with frozen sources; inactive modes map to themselves.
struct FrozenOperator<'a> {
    mesh: &'a DgMesh,
    nh: usize,
    active: &'a [bool],
    v_th: f64,
    delta: f64,
    sources: &'a [FrozenSource],
    g: Vec<f64>,
    nodes: Vec<f64>,
    src: Vec<f64>,
}

impl<'a> FrozenOperator<'a> {
    fn new(
        mesh: &'a DgMesh,
        nh: usize,
        active: &'a [bool],
        v_th: f64,
        delta: f64,
        sources: &'a [FrozenSource],
    ) -> Self {
        let npts = mesh.n_cells * mesh.n_quad();
        Self {
            mesh,
            nh,
            active,
            v_th,
            delta,
            sources,
            g: vec![0.0; mesh.n_dofs()],
            nodes: vec![0.0; nh * npts],
            src: vec![0.0; npts],
        }
    }

    fn apply(&mut self, x: &[f64], s: f64, out: &mut [f64]) {
        let mesh = self.mesh;
        let nd = mesh.n_dofs();
        let npts = mesh.n_cells * mesh.n_quad();
        let nh = self.nh;
        out.copy_from_slice(x);
        for k in 0..nh {
            if self.active[k] {
                node_values_into(mesh, &x[k * nd..(k + 1) * nd], &mut self.nodes[k * npts..(k + 1) * npts]);
            } else {
                self.nodes[k * npts..(k + 1) * npts].fill(0.0);
            }
        }
        for k in 0..nh {
            if !self.active[k] {
                continue;
            }
            self.g.fill(0.0);
            if k + 1 < nh && self.active[k + 1] {
                let c = self.v_th * ((k + 1) as f64).sqrt();
                for (gi, xi) in self.g.iter_mut().zip(&x[(k + 1) * nd..(k + 2) * nd]) {
                    *gi += c * xi;
                }
            }
            if k >= 1 && self.active[k - 1] {
                let c = self.v_th * (k as f64).sqrt();
                for (gi, xi) in self.g.iter_mut().zip(&x[(k - 1) * nd..k * nd]) {
                    *gi += c * xi;
                }
            }
            let out_k = &mut out[k * nd..(k + 1) * nd];
            transport_residual_add(mesh, &self.g, &x[k * nd..(k + 1) * nd], k, self.delta, s, out_k);
            if k == 0 {
                continue;
            }
            let nk = &self.nodes[k * npts..(k + 1) * npts];
            let nk1 = &self.nodes[(k - 1) * npts..k * npts];
            for p in 0..npts {
                let a2 = if k >= 2 { self.nodes[(k - 2) * npts + p] } else { 0.0 };
                self.src[p] = self.sources[p].apply(k, nk[p], nk1[p], a2);
            }
            project_node_values_add(mesh, &self.src, s, out_k);
        }
    }
}

/// Algorithm for the active set: for `k ≥ min_mode`, mode `k` is dropped iff
/// `‖α_{k−1}‖∞`, `‖α_k‖∞` and `‖α_{k+1}‖∞` are all below the threshold
/// (`α_{N_H} := 0`). Dropped modes are zeroed; modes 0..min_mode stay active.
pub fn adaptive_mask_update(mesh: &DgMesh, coeffs: &mut HermiteCoefficients, cfg: &TimeStepperConfig) {
    let nh = coeffs.n_modes;
    let norms: Vec<f64> = (0..=nh).map(|k| coeffs.mode_linf(mesh, k)).collect();
    let thr = cfg.adaptive_threshold;
    for k in 0..nh {
        coeffs.active[k] = if k < cfg.adaptive_min_mode.max(3) {
            true
        } else {
            !(norms[k - 1] <= thr && norms[k] <= thr && norms[k + 1] <= thr)
        };
    }
    coeffs.apply_mask();
}
