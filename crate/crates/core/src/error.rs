use thiserror::Error;

/// Errors raised by the moment engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A request exceeds a configured work or size limit.
    #[error("capacity exceeded: {what} = {requested} exceeds the limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },
    #[error("parameter {name} = {value} is outside its admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// `Pi0` must be a real symmetric involution.
    #[error("matrix is not a symmetric involution (residual {residual:e})")]
    NotInvolution { residual: f64 },
    #[error("Gram matrix at level {level} is not positive definite")]
    NotInvertible { level: usize },
    #[error("lengths along two geodesics disagree for a group element of degree {degree}")]
    InconsistentLengths { degree: usize },
    #[error("generator index {index} out of range for degree {degree}")]
    GeneratorOutOfRange { index: usize, degree: usize },
    #[error("invalid input: {0}")]
    Invalid(&'static str),
    #[error("slot operators built with different horizons ({0} and {1})")]
    HorizonMismatch(usize, usize),
    #[error("site index {index} lies beyond the slot horizon {horizon}")]
    BeyondHorizon { index: usize, horizon: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
