use thiserror::Error;

/// Errors raised by set algebra, map evaluation, solvers and checkers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error("infeasible set: {0}")]
    InfeasibleSet(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("shape mismatch at {field}: {detail}")]
    ShapeMismatch { field: String, detail: String },
    #[error("validation failed at {field}: {detail}")]
    Validation { field: String, detail: String },
    #[error("point is not in K (distance {distance:e})")]
    NotInK { distance: f64 },
    #[error("solver stalled with residual {residual:e}")]
    Stalled { best: Vec<f64>, residual: f64 },
    #[error("solver hit the iteration limit with residual {residual:e}")]
    MaxIter { best: Vec<f64>, residual: f64 },
    #[error("no starting point: {0}")]
    NoStart(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("dimension {n} exceeds the enumeration limit of {max}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("sampler exhausted: {0}")]
    SamplerExhausted(String),
    #[error("missing check `{0}`")]
    MissingCheck(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch { field: field.into(), detail: detail.into() }
    }

    pub(crate) fn invalid(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), detail: detail.into() }
    }
}
