use thiserror::Error;

/// Errors raised by the numeric routines.
///
/// Values are carried as `f64` regardless of the scalar type used for the
/// computation so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: value {value} is outside the valid domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root solver did not converge (residual {residual:e})")]
    Solver { residual: f64 },

    #[error(
        "quadrature did not reach tolerance (estimated error {achieved:e}, target {target:e})"
    )]
    Quadrature { achieved: f64, target: f64 },

    #[error(
        "no sign change in [{lo}, {hi}]: the evidence never crosses the odds cutoff in this band"
    )]
    NoThreshold { lo: f64, hi: f64 },

    #[error("prior has an unbounded density at the null; use the horseshoe threshold")]
    UnboundedLocalDensity,

    #[error("operation requires a proper (normalized) prior, got {0}")]
    ImproperPrior(String),

    #[error("degenerate correlation rho = {0}")]
    DegenerateCorrelation(f64),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
