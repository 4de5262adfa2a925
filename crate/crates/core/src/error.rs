use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("mixing angle undefined: pump and Stokes Rabi frequencies are both zero")]
    UndefinedAngle,

    #[error("operation requires a {expected} level scheme")]
    WrongScheme { expected: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integration failed at t = {t} us: step size underflow")]
    StepUnderflow { t: f64 },

    #[error("time {t} us outside trajectory window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },

    #[error("profile returned a non-finite value at node {node} (delta = {delta} MHz)")]
    NonFiniteProfile { node: usize, delta: f64 },

    #[error("half maximum not resolvable on the {side} side of the peak")]
    NotResolvable { side: &'static str },

    #[error("scan point {parameter} = {x} failed: {source}")]
    ScanPoint {
        parameter: String,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepUnderflow { .. } | Error::NonFiniteProfile { .. } => true,
            Error::ScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
