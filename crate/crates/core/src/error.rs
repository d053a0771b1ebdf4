use thiserror::Error;

/// Errors raised by the bound calculators, the simulator and the workflows.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-physical covariance: {0}")]
    NonPhysicalCovariance(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Fock truncation too short: tail mass {tail_mass:e} at n_max = {n_max}")]
    Truncation { n_max: usize, tail_mass: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("insufficient rounds: need {needed}, have {available}")]
    InsufficientRounds { needed: usize, available: usize },

    #[error("epsilon {epsilon:e} below the validity floor {floor:e}")]
    EpsilonTooSmall { epsilon: f64, floor: f64 },

    #[error("outside validity range: {0}")]
    ValidityRange(String),

    #[error("bound regime violated: {0}")]
    Regime(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_probability(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must lie in (0, 1), got {value}")))
    }
}
