use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("point {point} lies outside the basis domain [{lower}, {upper}]")]
    OutOfDomain { point: f64, lower: f64, upper: f64 },

    #[error("derivative order {order} is not supported (maximum {max})")]
    UnsupportedDerivative { order: usize, max: usize },

    #[error("bases are defined on different domains")]
    DomainMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear system is singular or not positive definite")]
    Singular,

    #[error("linear system is ill-conditioned (estimated condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("labels must be -1 or +1 (found {value} at index {index})")]
    InvalidLabel { index: usize, value: f64 },

    #[error("weak learner failed: {0}")]
    LearnerFailure(String),

    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
