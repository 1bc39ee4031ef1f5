//! Run configuration, named presets and the initial data of the two test cases.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dg_space::{DgFunction, DgMesh};
use crate::error::{Error, Result};
use crate::hermite_basis::HermiteCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Electrons over a fixed ion background, no electron-ion collisions.
    OneSpecies,
    /// Electrons against Maxwellian ions with `u_i = 0` and a spatially uniform `T_i(t)`.
    TwoSpeciesSimplified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub eps: f64,
    pub nu_ee: f64,
    pub nu_ei: f64,
    pub length: f64,
    /// One species: ion density amplitude. Two species: electron density amplitude.
    pub kappa: f64,
    /// Ion density amplitude of the two-species case.
    #[serde(default)]
    pub ion_amp: f64,
    /// Drift amplitude of the two-stream data.
    #[serde(default = "default_u0_amp")]
    pub u0_amp: f64,
    /// Constant added to the drift (non-zero breaks momentum admissibility).
    #[serde(default)]
    pub u0_shift: f64,
    /// Initial ion temperature of the two-species case.
    #[serde(default = "default_ti0")]
    pub ti0: f64,
    /// Rescale projected electron data to the ion particle number.
    #[serde(default = "default_true")]
    pub neutralize: bool,
}

fn default_u0_amp() -> f64 {
    0.5
}
fn default_ti0() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    InverseH,
}

/// LDG penalty: a constant or `1/h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LdgBeta {
    Constant(f64),
    Rule(BetaRule),
}

impl LdgBeta {
    pub fn value(&self, h: f64) -> f64 {
        match self {
            LdgBeta::Constant(b) => *b,
            LdgBeta::Rule(BetaRule::InverseH) => 1.0 / h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub nx: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_beta")]
    pub ldg_beta: LdgBeta,
}

fn default_order() -> usize {
    2
}
fn default_beta() -> LdgBeta {
    LdgBeta::Constant(crate::dg_space::DEFAULT_BETA)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HermiteSection {
    pub nh: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_over_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_over_eps: Option<f64>,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_iters")]
    pub picard_max_iters: usize,
}

fn default_picard_tol() -> f64 {
    1e-10
}
fn default_picard_iters() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub enabled: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_min_mode")]
    pub min_mode: usize,
}

fn default_threshold() -> f64 {
    1e-6
}
fn default_min_mode() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    /// Lax-Friedrichs viscosity; `v_th sqrt(N_H)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Steps between two series records.
    #[serde(default = "default_every")]
    pub every: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_snap_n")]
    pub snapshot_nx: usize,
    #[serde(default = "default_snap_n")]
    pub snapshot_nv: usize,
    /// Snapshot velocity window `[-vmax, vmax]`.
    #[serde(default = "default_vmax")]
    pub snapshot_vmax: f64,
    #[serde(default = "default_entropy_nv")]
    pub entropy_nv: usize,
    /// Entropy grid half-width in units of `v_th`.
    #[serde(default = "default_entropy_width")]
    pub entropy_width: f64,
}

fn default_every() -> usize {
    50
}
fn default_snap_n() -> usize {
    128
}
fn default_vmax() -> f64 {
    6.0
}
fn default_entropy_nv() -> usize {
    256
}
fn default_entropy_width() -> f64 {
    6.0
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            every: default_every(),
            snapshot_times: Vec::new(),
            snapshot_nx: default_snap_n(),
            snapshot_nv: default_snap_n(),
            snapshot_vmax: default_vmax(),
            entropy_nv: default_entropy_nv(),
            entropy_width: default_entropy_width(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub mesh: MeshSection,
    pub hermite: HermiteSection,
    pub time: TimeSection,
    pub adaptive: AdaptiveSection,
    #[serde(default)]
    pub transport: TransportSection,
    #[serde(default)]
    pub output: OutputSection,
}

pub const PRESETS: [&str; 3] = ["one_species_5_1", "two_species_5_2", "two_species_5_2_nu_ee_0_1"];

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "one_species_5_1" => Ok(Self {
                scenario: ScenarioSection {
                    kind: ScenarioKind::OneSpecies,
                    eps: 1.0,
                    nu_ee: 0.01,
                    nu_ei: 0.0,
                    length: 12.0,
                    kappa: 0.1,
                    ion_amp: 0.0,
                    u0_amp: 0.5,
                    u0_shift: 0.0,
                    ti0: 1.0,
                    neutralize: true,
                },
                mesh: MeshSection {
                    nx: 32,
                    order: 2,
                    ldg_beta: default_beta(),
                },
                hermite: HermiteSection { nh: 64 },
                time: TimeSection {
                    dt: Some(1.0 / 500.0),
                    dt_over_eps: None,
                    t_end: Some(25.0),
                    t_end_over_eps: None,
                    picard_tol: default_picard_tol(),
                    picard_max_iters: default_picard_iters(),
                },
                adaptive: AdaptiveSection {
                    enabled: false,
                    threshold: default_threshold(),
                    min_mode: default_min_mode(),
                },
                transport: TransportSection::default(),
                output: OutputSection {
                    snapshot_times: vec![2.5, 5.0, 12.5, 25.0],
                    ..Default::default()
                },
            }),
            "two_species_5_2" => Ok(Self {
                scenario: ScenarioSection {
                    kind: ScenarioKind::TwoSpeciesSimplified,
                    eps: 1e-3,
                    nu_ee: 0.5,
                    nu_ei: 0.1,
                    length: 12.0,
                    kappa: 0.01,
                    ion_amp: 0.2,
                    u0_amp: 0.0,
                    u0_shift: 0.0,
                    ti0: 1.0,
                    neutralize: true,
                },
                mesh: MeshSection {
                    nx: 32,
                    order: 2,
                    ldg_beta: default_beta(),
                },
                hermite: HermiteSection { nh: 32 },
                time: TimeSection {
                    dt: None,
                    dt_over_eps: Some(1.0 / 500.0),
                    t_end: None,
                    t_end_over_eps: Some(50.0),
                    picard_tol: default_picard_tol(),
                    picard_max_iters: default_picard_iters(),
                },
                adaptive: AdaptiveSection {
                    enabled: true,
                    threshold: default_threshold(),
                    min_mode: default_min_mode(),
                },
                transport: TransportSection::default(),
                output: OutputSection::default(),
            }),
            "two_species_5_2_nu_ee_0_1" => {
                let mut c = Self::preset("two_species_5_2")?;
                c.scenario.eps = 1.0;
                c.scenario.nu_ee = 0.1;
                Ok(c)
            }
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.scenario.length
    }

    pub fn dt(&self) -> f64 {
        match (self.time.dt, self.time.dt_over_eps) {
            (Some(dt), _) => dt,
            (None, Some(r)) => r * self.scenario.eps,
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn t_end(&self) -> f64 {
        match (self.time.t_end, self.time.t_end_over_eps) {
            (Some(t), _) => t,
            (None, Some(r)) => r * self.scenario.eps,
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        let bad = |m: String| Err(Error::Config(m));
        if !(s.eps > 0.0 && s.eps <= 1.0) {
            return bad(format!("scenario.eps = {} outside (0, 1]", s.eps));
        }
        if s.nu_ee < 0.0 || s.nu_ei < 0.0 {
            return bad("collision frequencies must be non-negative".into());
        }
        if !(s.length > 0.0) {
            return bad(format!("scenario.length = {}", s.length));
        }
        if s.kind == ScenarioKind::OneSpecies && (s.eps != 1.0 || s.nu_ei != 0.0) {
            return bad("one_species requires eps = 1 and nu_ei = 0".into());
        }
        if s.kind == ScenarioKind::TwoSpeciesSimplified && !(s.ti0 > 0.0) {
            return bad(format!("scenario.ti0 = {}", s.ti0));
        }
        if self.mesh.nx == 0 {
            return bad("mesh.nx must be positive".into());
        }
        if let LdgBeta::Constant(b) = self.mesh.ldg_beta {
            if !(b > 0.0) {
                return bad(format!("mesh.ldg_beta = {b}"));
            }
        }
        if self.hermite.nh < 3 {
            return bad(format!("hermite.nh = {} (need at least 3)", self.hermite.nh));
        }
        let t = &self.time;
        if t.dt.is_some() == t.dt_over_eps.is_some() {
            return bad("exactly one of time.dt and time.dt_over_eps must be set".into());
        }
        if t.t_end.is_some() == t.t_end_over_eps.is_some() {
            return bad("exactly one of time.t_end and time.t_end_over_eps must be set".into());
        }
        if !(self.dt() > 0.0) || !(self.t_end() >= 0.0) {
            return bad("time step must be positive and t_end non-negative".into());
        }
        if !(t.picard_tol > 0.0) || t.picard_max_iters == 0 {
            return bad("Picard tolerance and iteration cap must be positive".into());
        }
        if self.adaptive.min_mode < 3 {
            return bad("adaptive.min_mode must be at least 3".into());
        }
        if !(self.adaptive.threshold > 0.0) {
            return bad("adaptive.threshold must be positive".into());
        }
        if let Some(d) = self.transport.delta {
            if d < 0.0 {
                return bad(format!("transport.delta = {d}"));
            }
        }
        if self.output.every == 0 || self.output.entropy_nv < 2 || self.output.snapshot_nv == 0 || self.output.snapshot_nx == 0 {
            return bad("output resolutions and cadence must be positive".into());
        }
        Ok(())
    }
}

/// Initial electron distribution `f0(x, v)` exactly as in the test cases.
pub fn initial_electron_distribution(cfg: &ScenarioConfig) -> impl Fn(f64, f64) -> f64 {
    let s = cfg.scenario.clone();
    let k = cfg.wavenumber();
    move |x: f64, v: f64| match s.kind {
        ScenarioKind::OneSpecies => {
            let u0 = s.u0_amp * (k * x).sin() + s.u0_shift;
            (1.0 + 5.0 * v * v) * (-0.5 * (v - u0) * (v - u0)).exp() / (6.0 * (2.0 * PI).sqrt())
        }
        ScenarioKind::TwoSpeciesSimplified => {
            (-0.5 * v * v).exp() / (2.0 * PI).sqrt() * (1.0 + s.kappa * (k * x).cos())
        }
    }
}

/// Ion density profile.
pub fn ion_density(cfg: &ScenarioConfig) -> impl Fn(f64) -> f64 {
    let k = cfg.wavenumber();
    let amp = match cfg.scenario.kind {
        ScenarioKind::OneSpecies => cfg.scenario.kappa,
        ScenarioKind::TwoSpeciesSimplified => cfg.scenario.ion_amp,
    };
    move |x: f64| 1.0 + amp * (k * x).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub enum IonModel {
    /// Static background density.
    Fixed { density: DgFunction },
    /// Maxwellian ions, `u_i = 0`, temperature advanced in time.
    Maxwellian { density: DgFunction, ti0: f64 },
}

impl IonModel {
    pub fn density(&self) -> &DgFunction {
        match self {
            IonModel::Fixed { density } | IonModel::Maxwellian { density, .. } => density,
        }
    }
}

pub fn ion_background(cfg: &ScenarioConfig, mesh: &DgMesh) -> IonModel {
    let density = DgFunction::project(mesh, ion_density(cfg));
    match cfg.scenario.kind {
        ScenarioKind::OneSpecies => IonModel::Fixed { density },
        ScenarioKind::TwoSpeciesSimplified => IonModel::Maxwellian {
            density,
            ti0: cfg.scenario.ti0,
        },
    }
}

/// `∫ v_th α_1 dx`; an error for the one-species case when it exceeds `1e−10`.
pub fn momentum_admissibility_check(
    cfg: &ScenarioConfig,
    mesh: &DgMesh,
    v_th: f64,
    coeffs: &HermiteCoefficients,
) -> Result<f64> {
    let p = v_th * coeffs.mode_function(mesh, 1).integral(mesh);
    if cfg.scenario.kind == ScenarioKind::OneSpecies && p.abs() > 1e-10 {
        return Err(Error::Admissibility(format!(
            "initial momentum {p:e} is not zero; the one-species equilibrium needs a zero-momentum start"
        )));
    }
    Ok(p)
}
