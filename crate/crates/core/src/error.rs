use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes surfaced by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interaction U0 is zero, the extremum cubic degenerates to a linear equation")]
    ZeroInteraction,

    #[error("resonant denominator in symplectic norm (|denominator| = {0:e})")]
    ResonantDenominator(f64),

    #[error("trajectory diverged at t = {time} (|alpha| = {amplitude:e})")]
    Divergence { time: f64, amplitude: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("marginal stability: eigenvalue with |Re| = {0:e}")]
    MarginalStability(f64),

    #[error("singular inversion at omega = {omega}")]
    SingularInversion { omega: f64 },

    #[error("hilbert space dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("not converged after t = {time}: residual {residual:e}")]
    NotConverged { time: f64, residual: f64 },

    #[error("population of mode {mode} went negative ({value:e}) at t = {time}")]
    NegativePopulation { mode: usize, time: f64, value: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::InvalidArgument(_) => 2,
            Error::CapExceeded { .. } => 4,
            _ => 3,
        }
    }
}
