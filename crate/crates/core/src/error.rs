use thiserror::Error;

/// Errors raised by the quadrature routines and experiment runners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("value {value} outside of [{lower}, {upper}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("evaluation point coincides with the centerline (distance {distance:e})")]
    DivisionByZero { distance: f64 },

    #[error("root finding did not converge after {iterations} iterations (last step {last_step:e})")]
    RootNotFound { iterations: usize, last_step: f64 },

    /// The adaptive integrator could not meet its tolerance; the best
    /// available estimate is attached.
    #[error("tolerance not met: estimate {estimate:?}, error estimate {error:e}")]
    AccuracyFailure { estimate: Vec<f64>, error: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
