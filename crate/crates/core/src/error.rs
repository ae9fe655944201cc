use thiserror::Error;

use crate::expr::{DomainError, ParseError};

/// Errors raised by the engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("domain error at point {point:?}: {source}")]
    DomainAt {
        source: DomainError,
        point: Vec<f64>,
    },

    #[error("total derivative of an order-{order} expression overflows T^{r}M")]
    OrderOverflow { order: usize, r: usize },

    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("operands live on different jet spaces: {0}")]
    SpaceMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular hessian: rank {rank} < {n}")]
    SingularHessian { rank: usize, n: usize },

    #[error("singular metric")]
    SingularMetric,

    #[error("residual is not proportional to C_r: {0}")]
    NotProportional(String),

    #[error("assertion failed: {0}")]
    AssertionFailure(String),

    #[error("sampler could not find an admissible point after {attempts} attempts")]
    Sampling { attempts: usize },

    #[error("integration failed at step {step} (t = {time}): {source}")]
    Integration {
        step: usize,
        time: f64,
        source: DomainError,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
