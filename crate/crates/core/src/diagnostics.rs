//! Monitored quantities of a run and their output formats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::debug;

use crate::collisions::{entropy_dissipation_diagnostic, mixed_quantities, moments_unchecked, MomentSet, VelocityGrid};
use crate::error::Result;
use crate::hermite_basis::reconstruct_distribution;
use crate::integrator::{kinetic_energy, SimulationState, Solver};

/// Number of coefficient norms reported, `‖α_k‖` for `k = 1..=6`.
pub const ALPHA_NORMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyGrid {
    /// Half width in units of `v_th`.
    pub width: f64,
    pub n_v: usize,
}

impl Default for EntropyGrid {
    fn default() -> Self {
        Self { width: 6.0, n_v: 256 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    /// Relative to the first record.
    pub mass_dev: f64,
    /// Absolute, the initial momentum is zero or nearly so.
    pub momentum_dev: f64,
    pub energy_dev: f64,
    pub potential_energy: f64,
    pub te_mean: f64,
    pub ti: Option<f64>,
    pub v_th: f64,
    pub l2_alpha: Vec<f64>,
    pub u_l2: f64,
    pub t_dev_l2: f64,
    pub phi_dev: f64,
    pub entropy: f64,
    /// Grid points with `f ≤ 0` left out of the entropy integrals.
    pub entropy_excluded: usize,
    pub entropy_dissipation: f64,
    /// Right side of `ε dH/dt + D = S` for the electron-ion exchange.
    pub entropy_source: f64,
    /// `ε ΔH/Δt + D − S` from the previous record, midpoint averaged; 0 on the first record.
    pub entropy_residual: f64,
    pub active_modes: usize,
}

pub fn compute_record(solver: &Solver, state: &SimulationState, grid: &EntropyGrid) -> DiagnosticRecord {
    let mesh = &solver.mesh;
    let c = &state.coeffs;
    let v = state.basis.v_th;
    let nq = mesh.n_quad();
    let npts = mesh.n_cells * nq;
    let nh = c.n_modes;
    let eps = solver.params.eps;

    let mass = c.mode_function(mesh, 0).integral(mesh);
    let momentum = v * c.mode_function(mesh, 1).integral(mesh);
    let potential_energy = solver.poisson.field_energy(&state.field.phi);
    let w_i = state.ion_temperature.map_or(0.0, |t| 0.5 * solver.n_e_total * t);
    let energy = kinetic_energy(mesh, v, c) + potential_energy + w_i;

    let nodes: Vec<Vec<f64>> = (0..nh).map(|k| c.mode_function(mesh, k).node_values(mesh)).collect();
    let ni = solver.n_i().node_values(mesh);
    let vgrid = VelocityGrid::new(grid.width * v, grid.n_v);
    let (mut u2, mut tdev2, mut nt, mut entropy, mut dissipation, mut source) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut excluded = 0;
    let mut alpha = vec![0.0; nh];
    for p in 0..npts {
        let jw = mesh.basis.jw[p % nq];
        for k in 0..nh {
            alpha[k] = nodes[k][p];
        }
        let m = moments_unchecked(v, alpha[0], alpha[1], alpha[2]);
        u2 += jw * m.u * m.u;
        tdev2 += jw * (m.t - v * v).powi(2);
        nt += jw * m.n * m.t;
        let ion = MomentSet::maxwellian(ni[p], 0.0, state.ion_temperature.unwrap_or(m.t));
        let mix = mixed_quantities(&m, &ion, eps, solver.params.nu_ee, solver.params.nu_ei);
        for (&vv, &w) in vgrid.points.iter().zip(&vgrid.weights) {
            let psi = state.basis.eval_upto(nh, vv);
            let f: f64 = alpha.iter().zip(&psi).map(|(a, b)| a * b).sum();
            if f > 0.0 {
                entropy += jw * w * f * f.ln();
            } else {
                excluded += 1;
            }
        }
        if m.n > 0.0 && m.t > 0.0 {
            let (d, _) = entropy_dissipation_diagnostic(&state.basis, &alpha, &m, &mix, &vgrid);
            dissipation += jw * d;
        }
        if solver.params.nu_ei > 0.0 && mix.t_ei > 0.0 {
            let e2 = eps * eps;
            source += jw * solver.params.nu_ei * m.n / mix.t_ei
                * (-(1.0 - e2) / (1.0 + e2) * m.u * m.u / 4.0 + e2 / (1.0 + e2) * (m.t - ion.t));
        }
    }
    if excluded > 0 {
        debug!("entropy grid: {excluded} points with f <= 0 excluded at t={}", state.time);
    }
    let phi_dev = state.field.phi.sub(&state.limit.phi_bar).l2_norm();
    let l2_alpha = (1..=ALPHA_NORMS.min(nh - 1)).map(|k| c.mode_l2(k)).collect();

    DiagnosticRecord {
        time: state.time,
        mass,
        momentum,
        energy,
        mass_dev: 0.0,
        momentum_dev: 0.0,
        energy_dev: 0.0,
        potential_energy,
        te_mean: nt / mass,
        ti: state.ion_temperature,
        v_th: v,
        l2_alpha,
        u_l2: u2.sqrt(),
        t_dev_l2: tdev2.sqrt(),
        phi_dev,
        entropy,
        entropy_excluded: excluded,
        entropy_dissipation: dissipation,
        entropy_source: source,
        entropy_residual: 0.0,
        active_modes: c.active_count(),
    }
}

/// Fills deviations against the first record and the entropy residual against the previous one.
#[derive(Debug, Clone, Default)]
pub struct Series {
    pub eps: f64,
    initial: Option<DiagnosticRecord>,
    prev: Option<DiagnosticRecord>,
}

impl Series {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            ..Default::default()
        }
    }

    pub fn push(&mut self, mut rec: DiagnosticRecord) -> DiagnosticRecord {
        let init = self.initial.get_or_insert_with(|| rec.clone());
        rec.mass_dev = (rec.mass - init.mass) / init.mass.abs();
        rec.momentum_dev = rec.momentum - init.momentum;
        rec.energy_dev = (rec.energy - init.energy) / init.energy.abs();
        if let Some(prev) = &self.prev {
            let dt = rec.time - prev.time;
            if dt > 0.0 {
                rec.entropy_residual = self.eps * (rec.entropy - prev.entropy) / dt
                    + 0.5 * (rec.entropy_dissipation + prev.entropy_dissipation)
                    - 0.5 * (rec.entropy_source + prev.entropy_source);
            }
        }
        self.prev = Some(rec.clone());
        rec
    }
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "time",
        "mass",
        "momentum",
        "energy",
        "mass_dev",
        "momentum_dev",
        "energy_dev",
        "potential_energy",
        "te_mean",
        "ti",
        "v_th",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=ALPHA_NORMS).map(|k| format!("alpha{k}_l2")));
    h.extend(
        [
            "u_l2",
            "t_dev_l2",
            "phi_dev",
            "entropy",
            "entropy_excluded",
            "entropy_dissipation",
            "entropy_source",
            "entropy_residual",
            "active_modes",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one row per record; `ti` and missing `alpha*_l2` columns are left empty.
pub struct SeriesWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl SeriesWriter<File> {
    pub fn create(path: &Path) -> Result<Self> {
        let inner = csv::Writer::from_writer(File::create(path)?);
        Self::with_header(inner)
    }
}

impl<W: Write> SeriesWriter<W> {
    pub fn from_writer(w: W) -> Result<Self> {
        Self::with_header(csv::Writer::from_writer(w))
    }

    fn with_header(mut inner: csv::Writer<W>) -> Result<Self> {
        inner.write_record(csv_header()).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &DiagnosticRecord) -> Result<()> {
        let mut row = vec![
            fmt(r.time),
            fmt(r.mass),
            fmt(r.momentum),
            fmt(r.energy),
            fmt(r.mass_dev),
            fmt(r.momentum_dev),
            fmt(r.energy_dev),
            fmt(r.potential_energy),
            fmt(r.te_mean),
            r.ti.map(fmt).unwrap_or_default(),
            fmt(r.v_th),
        ];
        for k in 0..ALPHA_NORMS {
            row.push(r.l2_alpha.get(k).copied().map(fmt).unwrap_or_default());
        }
        row.extend([
            fmt(r.u_l2),
            fmt(r.t_dev_l2),
            fmt(r.phi_dev),
            fmt(r.entropy),
            r.entropy_excluded.to_string(),
            fmt(r.entropy_dissipation),
            fmt(r.entropy_source),
            fmt(r.entropy_residual),
            r.active_modes.to_string(),
        ]);
        self.inner.write_record(&row).map_err(csv_err)
    }

    pub fn flush(&mut self) -> Result<()> {
        Ok(self.inner.flush()?)
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// `f(x_i, v_j)` on a tensor grid, row-major in `x`: `values[i * v.len() + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub values: Vec<f64>,
}

/// Cell-centred `x` points; `v` uniform on `[-v_max, v_max]` (a single point sits at 0).
pub fn snapshot_distribution(solver: &Solver, state: &SimulationState, n_x: usize, v_max: f64, n_v: usize) -> Snapshot {
    let len = solver.mesh.length;
    let x: Vec<f64> = (0..n_x).map(|i| (i as f64 + 0.5) * len / n_x as f64).collect();
    let v: Vec<f64> = if n_v == 1 {
        vec![0.0]
    } else {
        (0..n_v)
            .map(|j| -v_max + 2.0 * v_max * j as f64 / (n_v - 1) as f64)
            .collect()
    };
    let mut values = Vec::with_capacity(n_x * n_v);
    for &xi in &x {
        for &vj in &v {
            values.push(reconstruct_distribution(&state.coeffs, &state.basis, &solver.mesh, xi, vj));
        }
    }
    Snapshot {
        time: state.time,
        x,
        v,
        values,
    }
}

impl Snapshot {
    /// Plain-text matrix: `#` header lines, then one line per `x` with `n_v` values.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# time {:.16e}", self.time)?;
        writeln!(w, "# shape {} {} (rows x, columns v)", self.x.len(), self.v.len())?;
        let vmin = self.v.first().copied().unwrap_or(0.0);
        let vmax = self.v.last().copied().unwrap_or(0.0);
        writeln!(w, "# v_window {vmin:.16e} {vmax:.16e}")?;
        let xs: Vec<String> = self.x.iter().map(|x| fmt(*x)).collect();
        writeln!(w, "# x {}", xs.join(" "))?;
        for row in self.values.chunks(self.v.len().max(1)) {
            let line: Vec<String> = row.iter().map(|x| fmt(*x)).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }
}
