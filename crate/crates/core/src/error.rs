use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed to converge: residual {residual:e} after {iterations} iterations")]
    NumericFailure { residual: f64, iterations: usize },

    #[error("no eigenvalue bracket found in energy window [{lo}, {hi}]")]
    SearchFailure { lo: f64, hi: f64 },

    #[error("basis lost orthogonality at pair ({i}, {j}): overlap deviation {deviation:e}")]
    DegradedBasis { i: usize, j: usize, deviation: f64 },

    #[error("reduced density matrix trace {trace} deviates from 1")]
    Normalization { trace: f64 },

    #[error("non-physical kernel: eigenvalue {eigenvalue:e} below tolerance")]
    NonPhysicalKernel { eigenvalue: f64 },

    #[error("invalid density: minimum value {min:e}")]
    InvalidDensity { min: f64 },

    #[error("self-consistency not reached after {} iterations (last residual {:e})", .residuals.len(), .residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { residuals: Vec<f64> },

    #[error("energy denominator {denominator:e} too small for configuration {label}")]
    DegenerateDenominator { denominator: f64, label: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid trial wavefunction: {0}")]
    InvalidTrial(String),

    #[error("omega grids do not align for methods: {0:?}")]
    Alignment(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
