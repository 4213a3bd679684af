use thiserror::Error;

pub type Result<T, E = HermitizeError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HermitizeError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("metric is not positive-definite: pivot {pivot} has value {value:.3e}")]
    MetricDegeneracy { pivot: usize, value: f64 },

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("matrix exponential overflowed: {0}")]
    Overflow(String),

    #[error("integration diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("metric lost positivity at t = {time}: minimum eigenvalue {min_eigenvalue:.3e}")]
    MetricCollapse { time: f64, min_eigenvalue: f64 },

    #[error("vielbein lost invertibility at t = {time} (condition estimate {condition:.3e})")]
    VielbeinSingular { time: f64, condition: f64 },

    #[error("unitarity drift {drift:.3e} at t = {time} exceeds tolerance; use a finer grid")]
    UnitarityDrift { time: f64, drift: f64 },

    #[error("internal consistency check `{check}` failed: residual {residual:.3e} > {tol:.3e}")]
    InternalConsistency { check: &'static str, residual: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regime mismatch: {0}")]
    Regime(String),
}

impl HermitizeError {
    /// Name of the structural invariant a failure violates, used on the
    /// error stream of the command-line tool.
    pub fn invariant(&self) -> &'static str {
        match self {
            Self::Shape(_) | Self::Parameter(_) | Self::Regime(_) => "configuration",
            Self::NonFinite(_) | Self::Overflow(_) | Self::Divergence { .. } => "finiteness",
            Self::NotHermitian { .. } => "hermiticity",
            Self::MetricDegeneracy { .. } | Self::MetricCollapse { .. } => "positivity",
            Self::Singular { .. } | Self::VielbeinSingular { .. } => "invertibility",
            Self::UnitarityDrift { .. } => "unitarity",
            Self::InternalConsistency { check, .. } => check,
            Self::Precondition(_) => "precondition",
        }
    }
}
