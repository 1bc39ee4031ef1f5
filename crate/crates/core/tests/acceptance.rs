//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! The long runs dominate (about ten minutes in the test profile).

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use vpfp::collisions::{collision_source, mixed_quantities, moments_from_coefficients, MomentSet};
use vpfp::dg_space::{DgFunction, DgMesh, LdgPoisson};
use vpfp::diagnostics::{compute_record, DiagnosticRecord, EntropyGrid, Series};
use vpfp::hermite_basis::{project_initial_data, HermiteBasis};
use vpfp::integrator::{SimulationState, Solver};
use vpfp::limit_model::{EnergyBudget, LimitSolver};
use vpfp::scenarios::ScenarioConfig;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, pass: bool, detail: String) -> Outcome {
    let o = Outcome { id, name, pass, detail };
    println!("{} criterion {} ({}): {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    o
}

struct Run {
    records: Vec<DiagnosticRecord>,
    state: SimulationState,
    low_modes_always_active: bool,
    snapshot: Option<Vec<f64>>,
}

/// Runs `cfg`, recording every `every` steps and keeping the coefficients at `snap_step`.
fn run(cfg: &ScenarioConfig, every: usize, snap_step: Option<usize>) -> Run {
    let started = Instant::now();
    let (solver, mut state) = Solver::initialize(cfg).expect("initialize");
    let grid = EntropyGrid::default();
    let mut series = Series::new(solver.params.eps);
    let mut records = Vec::new();
    let mut low = true;
    let mut snapshot = None;
    solver
        .run(&mut state, |s, st, _| {
            low &= st.coeffs.active[..3].iter().all(|&a| a);
            if Some(st.step) == snap_step {
                snapshot = Some(st.coeffs.data.clone());
            }
            if st.step % every == 0 {
                records.push(series.push(compute_record(s, st, &grid)).clone());
            }
            Ok(())
        })
        .expect("run");
    eprintln!(
        "run eps={} nu_ee={} adaptive={} to t={}: {:.1}s",
        cfg.scenario.eps,
        cfg.scenario.nu_ee,
        cfg.adaptive.enabled,
        cfg.t_end(),
        started.elapsed().as_secs_f64()
    );
    Run { records, state, low_modes_always_active: low, snapshot }
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Least-squares slope of `ln y` against `t`.
fn log_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let tm = t.iter().sum::<f64>() / n;
    let lm = ly.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(&ly).map(|(a, b)| (a - tm) * (b - lm)).sum();
    let den: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    num / den
}

fn one_species_checks(out: &mut Vec<Outcome>) {
    let mut cfg = ScenarioConfig::preset("one_species_5_1").unwrap();
    cfg.time.t_end = Some(100.0);
    cfg.output.snapshot_times.clear();
    let r = run(&cfg, 50, None);
    let recs = &r.records;

    let early: Vec<&DiagnosticRecord> = recs.iter().filter(|x| x.time <= 25.0 + 1e-9).collect();
    let dm = early.iter().fold(0.0f64, |m, x| m.max(x.mass_dev.abs()));
    let de = early.iter().fold(0.0f64, |m, x| m.max(x.energy_dev.abs()));
    out.push(outcome(
        1,
        "one-species conservation to t=25",
        dm < 1e-6 && de < 1e-6,
        format!("max |mass dev| {dm:.2e}, max |energy dev| {de:.2e} (tol 1e-6)"),
    ));

    let last = recs.last().unwrap();
    let drop = |f: fn(&DiagnosticRecord) -> f64| {
        let peak = recs.iter().map(f).fold(0.0f64, f64::max);
        (peak, f(last), peak / f(last))
    };
    let (up, uf, ud) = drop(|x| x.u_l2);
    let (tp, tf, td) = drop(|x| x.t_dev_l2);
    let tail: Vec<&DiagnosticRecord> = recs.iter().filter(|x| x.time >= 50.0).collect();
    let tt: Vec<f64> = tail.iter().map(|x| x.time).collect();
    let rate_u = log_slope(&tt, &tail.iter().map(|x| x.u_l2).collect::<Vec<_>>());
    let rate_t = log_slope(&tt, &tail.iter().map(|x| x.t_dev_l2).collect::<Vec<_>>());
    let amax = last.l2_alpha.iter().fold(0.0f64, |m, &a| m.max(a));
    out.push(outcome(
        2,
        "one-species thermalization by t=100",
        ud >= 1e6 && td >= 1e6 && rate_u < 0.0 && rate_t < 0.0 && amax < 1e-9,
        format!(
            "|u| {up:.2e} -> {uf:.2e} (drop {ud:.1e}), |T-v^2| {tp:.2e} -> {tf:.2e} (drop {td:.1e}), \
             tail rates {rate_u:.3}/{rate_t:.3}, max |alpha_1..6| {amax:.2e} (need drops >= 1e6, alpha < 1e-9)"
        ),
    ));

    let tdev = (last.te_mean - r.state.limit.t_bar).abs();
    out.push(outcome(
        8,
        "one-species long-time limit at t=100",
        last.phi_dev < 1e-4 && tdev < 1e-4,
        format!("|phi - phi_bar| {:.2e}, |T_mean - T_bar| {tdev:.2e} (tol 1e-4)", last.phi_dev),
    ));
}

fn limit_solver_checks(out: &mut Vec<Outcome>) {
    let l = 12.0;
    let ion = |x: f64| 1.0 + 0.2 * (2.0 * PI * x / l).cos();
    let mesh = DgMesh::new(128, l, 2).unwrap();
    let s = LimitSolver::new(LdgPoisson::new(&mesh).unwrap(), DgFunction::project(&mesh, ion));
    let sol = s.solve_poisson_boltzmann(1.0, l).unwrap();
    let reference = common::spectral::solve(ion, 1.0, l, 64);
    let dist = (0..500)
        .map(|i| (i as f64 + 0.5) * l / 500.0)
        .map(|x| (sol.phi.eval(&mesh, x) - reference.eval(x)).abs())
        .fold(0.0, f64::max);

    let mesh32 = DgMesh::new(32, l, 2).unwrap();
    let s32 = LimitSolver::new(LdgPoisson::new(&mesh32).unwrap(), DgFunction::project(&mesh32, ion));
    let budget = EnergyBudget { total_energy: 10.0, particle_number: l, ion_energy: 0.0 };
    let e: Vec<f64> = (0..20)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 19.0))
        .map(|t| s32.energy_of_temperature(&budget, t).unwrap())
        .collect();
    let monotone = e.windows(2).all(|w| w[1] > w[0]);
    let mut worst = 0.0f64;
    for total in [0.5, 6.3, 40.0, 3.0e4] {
        let b = EnergyBudget { total_energy: total, particle_number: l, ion_energy: 0.25 };
        let st = s32.find_limit_temperature(&b).unwrap();
        let r = (s32.energy_of_temperature(&b, st.t_bar).unwrap() - total).abs() / total;
        worst = worst.max(r);
    }
    out.push(outcome(
        3,
        "limit solver",
        dist < 1e-6 && monotone && worst < 1e-10,
        format!(
            "Linf vs pseudospectral {dist:.2e} (tol 1e-6), E(T) increasing on log grid: {monotone}, \
             max |E(T_bar)-E|/E {worst:.2e} (tol 1e-10)"
        ),
    ));
}

fn dg_order_checks(out: &mut Vec<Outcome>) {
    use common::orders::{advection_errors, orders, poisson_errors};
    let (phi, e) = poisson_errors();
    let adv = advection_errors();
    let all: Vec<(&str, Vec<f64>)> = vec![("phi", orders(&phi)), ("E", orders(&e)), ("transport", orders(&adv))];
    let min = all.iter().flat_map(|(_, o)| o.iter().copied()).fold(f64::INFINITY, f64::min);
    let detail = all.iter().map(|(n, o)| format!("{n} {o:.2?}")).collect::<Vec<_>>().join(", ");
    out.push(outcome(4, "DG orders", min >= 2.8, format!("{detail} (min {min:.2}, need >= 2.8)")));
}

fn sample<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).unwrap().current()
}

fn hermite_checks(out: &mut Vec<Outcome>) {
    use common::hermite::{derivative_defect, overlap};
    let mut runner = TestRunner::deterministic();

    let mut ortho = 0.0f64;
    for _ in 0..200 {
        let (v, a, b) = sample(&mut runner, &(0.2f64..4.0, 0usize..40, 0usize..40));
        let basis = HermiteBasis::new(40, v).unwrap();
        let expected = if a == b { 1.0 } else { 0.0 };
        ortho = ortho.max((overlap(&basis, a, b) - expected).abs());
    }

    let mut deriv = 0.0f64;
    for _ in 0..200 {
        let (v, k, s) = sample(&mut runner, &(0.3f64..3.0, 0usize..30, -6.0f64..6.0));
        deriv = deriv.max(derivative_defect(&HermiteBasis::new(40, v).unwrap(), k, s));
    }

    let mesh = DgMesh::new(8, 12.0, 2).unwrap();
    let mut proj = 0.0f64;
    for _ in 0..16 {
        let (v, amp) = sample(&mut runner, &(0.4f64..2.5, 0.0f64..0.5));
        let basis = HermiteBasis::new(12, v).unwrap();
        let n = |x: f64| 1.0 + amp * (2.0 * PI * x / 12.0).sin();
        let t = v * v;
        let c = project_initial_data(&basis, &mesh, |x, w| n(x) * (-w * w / (2.0 * t)).exp() / (2.0 * PI * t).sqrt())
            .unwrap();
        let dens = DgFunction::project(&mesh, n);
        proj = proj.max(linf_diff(c.mode(0), &dens.coeffs));
        for k in 1..12 {
            proj = proj.max(c.mode(k).iter().fold(0.0f64, |m, a| m.max(a.abs())));
        }
    }

    let mut q = 0.0f64;
    let coeffs = (0.3f64..3.0, 0.0f64..2.0, 0.2f64..3.0, proptest::collection::vec(-0.3f64..0.3, 15));
    for _ in 0..1000 {
        let (v, nu, a0, rest) = sample(&mut runner, &coeffs);
        let basis = HermiteBasis::new(16, v).unwrap();
        let mut alpha = vec![a0];
        alpha.extend(rest.iter().map(|r| r * a0));
        let m = moments_from_coefficients(&basis, alpha[0], alpha[1], alpha[2]).unwrap();
        let mix = mixed_quantities(&m, &MomentSet::maxwellian(1.0, 0.0, 1.0), 1.0, nu, 0.0);
        for k in 0..3 {
            q = q.max(collision_source(&basis, &alpha, &mix, &m, k).abs());
        }
    }
    out.push(outcome(
        5,
        "Hermite exactness",
        ortho < 1e-12 && deriv < 1e-6 && proj < 1e-12 && q < 1e-12,
        format!(
            "orthonormality {ortho:.2e}, derivative identity {deriv:.2e}, Maxwellian projection {proj:.2e}, \
             max |Q_0..2| over 1000 vectors {q:.2e}"
        ),
    ));
}

fn two_species(eps: f64, adaptive: bool, t_over_eps: f64, snap_step: Option<usize>) -> Run {
    let mut cfg = ScenarioConfig::preset("two_species_5_2").unwrap();
    cfg.scenario.eps = eps;
    cfg.adaptive.enabled = adaptive;
    cfg.time.t_end_over_eps = Some(t_over_eps);
    run(&cfg, 500, snap_step)
}

/// Largest active-mode count at or after `t0`.
fn max_active_after(recs: &[DiagnosticRecord], t0: f64) -> usize {
    recs.iter().filter(|r| r.time >= t0 - 1e-12).map(|r| r.active_modes).max().unwrap()
}

fn two_species_checks(out: &mut Vec<Outcome>) {
    let eps = 1e-3;
    // steps per ε is 500, so 50ε is step 25000
    let masked = two_species(eps, true, 250.0, Some(25_000));

    let de = masked.records.iter().fold(0.0f64, |m, x| m.max(x.energy_dev.abs()));
    let width = 25.0 * eps;
    let windows: Vec<(f64, f64)> = (0..6)
        .map(|i| {
            let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
            let m = masked
                .records
                .iter()
                .filter(|r| r.time > a + 1e-12 && r.time <= b + 1e-12)
                .map(|r| r.l2_alpha.iter().fold(0.0f64, |m, &x| m.max(x)))
                .fold(0.0f64, f64::max);
            (0.5 * (a + b), m)
        })
        .collect();
    let decreasing = windows.windows(2).all(|w| w[1].1 < w[0].1);
    let t: Vec<f64> = windows.iter().map(|w| w.0).collect();
    let y: Vec<f64> = windows.iter().map(|w| w.1).collect();
    let rate = log_slope(&t, &y) * eps;
    out.push(outcome(
        6,
        "two-species energy closure and layer decay (eps=1e-3, t=250 eps)",
        de < 1e-5 && decreasing && rate < 0.0,
        format!(
            "max |energy dev| {de:.2e} (tol 1e-5), max_k |alpha_k| per 25 eps window [{}], \
             decreasing: {decreasing}, log rate per eps {rate:.3}",
            y.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(" ")
        ),
    ));

    let unmasked = two_species(eps, false, 50.0, None);
    let diff = linf_diff(masked.snapshot.as_ref().unwrap(), &unmasked.state.coeffs.data);

    let after3 = max_active_after(&masked.records, 200.0 * eps);
    let eps2 = two_species(1e-2, true, 250.0, None);
    let after2 = max_active_after(&eps2.records, 200.0 * 1e-2);

    let mut cfg1 = ScenarioConfig::preset("two_species_5_2_nu_ee_0_1").unwrap();
    cfg1.time.t_end_over_eps = Some(100.0);
    let one = run(&cfg1, 500, None);
    let quarter: Vec<usize> = one.records.iter().filter(|r| r.time >= 75.0 - 1e-9).map(|r| r.active_modes).collect();
    let final_count = *quarter.last().unwrap();
    let spread = quarter.iter().max().unwrap() - quarter.iter().min().unwrap();

    let low = masked.low_modes_always_active && eps2.low_modes_always_active && one.low_modes_always_active;
    out.push(outcome(
        7,
        "adaptive truncation",
        low && after3 <= 3 && after2 <= 3 && (4..=6).contains(&final_count) && spread <= 2 && diff < 1e-5,
        format!(
            "modes 0-2 always active: {low}; max active after 200 eps: {after3} (eps=1e-3), {after2} (eps=1e-2), need <= 3; \
             eps=1 final count {final_count} (need 4..=6), spread over last quarter {spread} (need <= 2); \
             masked vs unmasked at 50 eps {diff:.2e} (tol 1e-5)"
        ),
    ));
}

fn oracle_check(out: &mut Vec<Outcome>) {
    let (diff, res) = common::step_check::compare(0.01, 1.0 / 500.0);
    out.push(outcome(
        9,
        "one step vs dense reference (16x16)",
        diff < 1e-8,
        format!("max coefficient difference {diff:.2e} (tol 1e-8), reference residual {res:.2e}"),
    ));
}

fn main() {
    let mut out = Vec::new();
    limit_solver_checks(&mut out);
    dg_order_checks(&mut out);
    hermite_checks(&mut out);
    oracle_check(&mut out);
    two_species_checks(&mut out);
    one_species_checks(&mut out);

    out.sort_by_key(|o| o.id);
    println!("summary:");
    for o in &out {
        println!("{} criterion {} ({}): {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    let failed = out.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria pass", out.len() - failed, out.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
