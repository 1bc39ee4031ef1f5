use thiserror::Error;

/// Errors raised by the solver and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-positive density {value:e} at cell {cell}, node {node}")]
    NonPositiveDensity { cell: usize, node: usize, value: f64 },
    #[error("quadrature overflow: {0}")]
    QuadratureOverflow(String),
    #[error("Poisson right-hand side is not compatible: mean {0:e}")]
    Compatibility(f64),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonNonConvergence { iterations: usize, residual: f64 },
    #[error("could not bracket the limit temperature: {0}")]
    BracketFailure(String),
    #[error("Picard iteration diverged at step {step} (increment {increment:e})")]
    PicardDivergence { step: usize, increment: f64 },
    #[error("linear solver failed: {0}")]
    LinearSolve(String),
    #[error("inadmissible state: {0}")]
    Admissibility(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable short name for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonPositiveDensity { .. } => "non_positive_density",
            Error::QuadratureOverflow(_) => "quadrature_overflow",
            Error::Compatibility(_) => "compatibility",
            Error::SingularSystem(_) => "singular_system",
            Error::NewtonNonConvergence { .. } => "newton_non_convergence",
            Error::BracketFailure(_) => "bracket_failure",
            Error::PicardDivergence { .. } => "picard_divergence",
            Error::LinearSolve(_) => "linear_solve",
            Error::Admissibility(_) => "admissibility",
            Error::Io(_) => "io",
        }
    }
}
