use core::fmt;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    Domain(&'static str),
    /// Two inputs that must agree in length did not.
    SizeMismatch { left: usize, right: usize },
    /// Adaptive quadrature could not reach its error target.
    Quadrature { value: f64, abs_error: f64, target: f64 },
    /// The requested integral does not converge.
    Divergent {
        /// Limit of the integrand in the `t = log log (1/u)` variable; a
        /// convergent tail would send this to zero.
        tail_density: f64,
    },
    /// A covariance matrix stayed indefinite after the maximum jitter.
    NotPositiveDefinite { pivot: usize, jitter: f64 },
    /// Input data was degenerate for the requested statistic.
    Degenerate(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::SizeMismatch { left, right } => {
                write!(f, "size mismatch: {left} vs {right}")
            }
            Error::Quadrature { value, abs_error, target } => write!(
                f,
                "quadrature did not converge: value {value:e}, error {abs_error:e} > target {target:e}"
            ),
            Error::Divergent { tail_density } => write!(
                f,
                "integral diverges (integrand tends to {tail_density:.6} in log-log scale)"
            ),
            Error::NotPositiveDefinite { pivot, jitter } => write!(
                f,
                "covariance not positive definite at pivot {pivot} with jitter {jitter:e}"
            ),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
