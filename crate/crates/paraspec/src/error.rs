//! Crate-wide error type.
//!
//! Every numerical failure carries a stable variant name that the CLI
//! prints on stderr before exiting with code 3 (config problems exit
//! with code 2 instead).

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fundamental-domain reduction did not terminate within the step cap.
    #[error("IterationCapExceeded: reduction did not terminate after {steps} steps")]
    IterationCapExceeded { steps: usize },

    /// Observable name not present in the registry.
    #[error("UnknownObservable: no invariant observable named `{0}`")]
    UnknownObservable(String),

    /// Adaptive quadrature hit its recursion cap before reaching tolerance.
    #[error("QuadratureFailure: interval [{a}, {b}] did not converge to {tol}")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },

    /// Adaptive ODE stepping failed (step underflow or consistency check).
    #[error("OdeStepFailure: {0}")]
    OdeStepFailure(String),

    /// Finite-difference derivative error estimate above the allowed bound.
    #[error("DerivativeUnstable: error estimate {estimate} exceeds {bound}")]
    DerivativeUnstable { estimate: f64, bound: f64 },

    /// Time-change would lose positivity at the requested perturbation size.
    #[error("PositivityViolated: epsilon*sup|u| = {headroom} >= 0.9")]
    PositivityViolated { headroom: f64 },

    /// Monte Carlo estimate too noisy for the requested contract.
    #[error("InsufficientSamples: relative standard error {rel_stderr} > {bound}")]
    InsufficientSamples { rel_stderr: f64, bound: f64 },

    /// Point/observable/system dimensions disagree.
    #[error("DimensionMismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Grid cannot resolve the frequency content of the requested operation.
    #[error("GridTooCoarse: step {n} needs bandwidth {needed} but the grid allows {allowed}")]
    GridTooCoarse { n: i64, needed: i64, allowed: i64 },

    /// Spectral density requires a uniform time grid.
    #[error("NonuniformGrid: time grid is not uniform (max deviation {max_dev})")]
    NonuniformGrid { max_dev: f64 },

    /// Not enough points in the decay-fit window.
    #[error("TooFewPoints: need at least {needed} points in the fit window, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// An upstream artifact expected in the run directory is absent.
    #[error("MissingArtifact: {0}")]
    MissingArtifact(String),

    /// Configuration file failed validation.
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    /// Matrix entries are not a valid unit-determinant 2x2 matrix.
    #[error("InvalidMatrix: {0}")]
    InvalidMatrix(String),

    /// System parameters violate a standing hypothesis.
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),

    /// Argument outside the supported range (overflow guards and caps).
    #[error("ParameterOutOfRange: {0}")]
    ParameterOutOfRange(String),

    /// Filesystem failure while writing or reading run artifacts.
    #[error("IoFailure: {0}")]
    IoFailure(String),
}

impl Error {
    /// Stable module-error name, printed on stderr by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::IterationCapExceeded { .. } => "IterationCapExceeded",
            Error::UnknownObservable(_) => "UnknownObservable",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::OdeStepFailure(_) => "OdeStepFailure",
            Error::DerivativeUnstable { .. } => "DerivativeUnstable",
            Error::PositivityViolated { .. } => "PositivityViolated",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NonuniformGrid { .. } => "NonuniformGrid",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::MissingArtifact(_) => "MissingArtifact",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::ParameterOutOfRange(_) => "ParameterOutOfRange",
            Error::IoFailure(_) => "IoFailure",
        }
    }

    /// CLI exit code: 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
