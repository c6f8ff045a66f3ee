use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count must be at least 2, got {0}")]
    ModeCount(usize),

    #[error("time scale must be positive and finite, got {0}")]
    TimeScale(f64),

    #[error("photon number must be at least 2, got {0}")]
    PhotonNumber(usize),

    #[error("mode index {index} out of range for {mode_count} modes")]
    ModeIndex { index: usize, mode_count: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operators are defined on different bases")]
    BasisMismatch,

    #[error("mixing parameter xi = {0} outside [0, 1]")]
    XiOutOfRange(f64),

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("least-squares fit needs at least {needed} points, got {got}")]
    Underdetermined { needed: usize, got: usize },

    #[error("mode counts must be strictly increasing (found {previous} then {next})")]
    NonIncreasing { previous: usize, next: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution has no photon pairs (<n(n-1)> = 0)")]
    NoPhotonPairs,

    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(String),

    #[error("inadmissible input: {0}")]
    Inadmissible(String),

    #[error("root finder failed on bracket [{lo}, {hi}]: {reason}")]
    RootBracket { lo: f64, hi: f64, reason: String },

    #[error("mode cap {cap} reached before the truncation criterion was met")]
    TruncationCap { cap: usize },

    #[error("quadrature grid too coarse: doubling changed the result by {change:.3e}")]
    QuadratureNotConverged { change: f64 },

    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),

    #[error("i/o error: {0}")]
    Io(String),
}
