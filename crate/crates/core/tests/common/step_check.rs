//! One solver step against the dense reference on a small one-species grid.

use super::oracle::OracleProblem;
use vpfp::integrator::Solver;
use vpfp::scenarios::ScenarioConfig;

pub fn small_one_species(nu: f64, dt: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset("one_species_5_1").unwrap();
    cfg.mesh.nx = 16;
    cfg.hermite.nh = 16;
    cfg.scenario.nu_ee = nu;
    cfg.time.dt = Some(dt);
    cfg.time.t_end = Some(dt);
    cfg
}

/// Returns (max coefficient difference, oracle residual).
pub fn compare(nu: f64, dt: f64) -> (f64, f64) {
    let cfg = small_one_species(nu, dt);
    let (solver, mut state) = Solver::initialize(&cfg).unwrap();
    let before = state.coeffs.data.clone();
    let oracle = OracleProblem {
        n_cells: 16,
        length: cfg.scenario.length,
        n_modes: 16,
        v_th: state.basis.v_th,
        eps: 1.0,
        nu,
        dt,
        delta: solver.delta(state.basis.v_th, 16),
        n_i: solver.n_i().coeffs.clone(),
    };
    let reference = oracle.step(&before);
    solver.crank_nicolson_step(&mut state).unwrap();
    let diff = reference
        .iter()
        .zip(&state.coeffs.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let res = oracle.residual(&before, &reference);
    let change = reference.iter().zip(&before).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    eprintln!("nu={nu} dt={dt}: step change {change:.3e}, difference {diff:.3e}, oracle residual {res:.3e}");
    (diff, res)
}
