use thiserror::Error;

/// Errors produced by the forecasting, risk and audit routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty reference class")]
    EmptyReferenceClass,

    #[error("probability out of range: {0} (expected 0 < p < 1)")]
    ProbabilityOutOfRange(f64),

    #[error("too few observations for quartiles: {0} (need at least 4)")]
    TooFewForQuartiles(usize),

    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),

    #[error("invalid observation `{id}`: {reason}")]
    InvalidObservation { id: String, reason: String },

    #[error("stage out of range: {0} (expected 1..=5)")]
    StageOutOfRange(u8),

    #[error("no uplift schedule for project type `{0}`")]
    UnknownProjectType(String),

    #[error("confidence {confidence} outside schedule anchors [{min}, {max}]")]
    ConfidenceOutsideAnchors { confidence: f64, min: f64, max: f64 },

    #[error("no {metric} bounds for project type `{project_type}`")]
    MissingBounds { project_type: String, metric: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid factor breakdown: {0}")]
    InvalidBreakdown(String),

    #[error("assessment missing factor `{0}`")]
    MissingFactor(String),

    #[error("assessment names unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: String, reason: String },

    #[error("empty risk register")]
    EmptyRegister,

    #[error("invalid risk `{id}`: {reason}")]
    InvalidRisk { id: String, reason: String },

    #[error("infeasible correlation target for pair ({a}, {b}): {reason}")]
    InfeasibleCorrelation { a: String, b: String, reason: String },

    #[error("correlation references unknown {what} `{name}`")]
    UnknownCorrelationTarget { what: &'static str, name: String },

    #[error("cannot enumerate register: {0}")]
    NotEnumerable(String),

    #[error("unknown audit rule `{0}`")]
    UnknownRule(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: name.to_string(),
            reason: format!("must be a finite non-negative number, got {value}"),
        })
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: name.to_string(),
            reason: format!("must be a finite positive number, got {value}"),
        })
    }
}
