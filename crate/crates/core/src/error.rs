use thiserror::Error;

use crate::martingale::ProcessClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space would have {leaves} leaves, above the limit of {limit}")]
    SpaceTooLarge { leaves: u128, limit: u128 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("kernel at node {node}: {reason}")]
    InvalidKernel { node: String, reason: String },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("stopping value {value} at leaf {leaf} is outside [0, {depth}]")]
    StoppingOutOfRange {
        leaf: usize,
        value: usize,
        depth: usize,
    },

    #[error("antichain does not cover leaf {leaf} exactly once")]
    InvalidAntichain { leaf: usize },

    #[error("stopping times are not ordered (S > T at leaf {leaf})")]
    StoppingOrder { leaf: usize },

    #[error("{count} pure strategies exceed the enumeration limit of {limit}")]
    TooManyStrategies { count: u128, limit: u128 },

    #[error("value at time {time} is not measurable with respect to F_{time}")]
    NotAdapted { time: usize },

    #[error("process is not a {expected}; classified as {}", .class.kind)]
    Classification {
        expected: &'static str,
        class: Box<ProcessClass>,
    },

    #[error("step {step} is not independent of the past: {reason}")]
    NotIndependent { step: usize, reason: String },

    #[error("domination |X_n| <= Y fails for n = {index} at leaf {leaf}")]
    DominationViolated { index: usize, leaf: usize },

    #[error("mean-uncertain step: E(X) = {upper}, -E(-X) = {lower}")]
    MeanUncertain { upper: f64, lower: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),
}

impl Error {
    /// True for failures of a theorem's hypotheses (as opposed to malformed input).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Classification { .. }
                | Error::NotIndependent { .. }
                | Error::MeanUncertain { .. }
                | Error::Precondition(_)
                | Error::DominationViolated { .. }
                | Error::StoppingOrder { .. }
        )
    }
}
