use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a team needs at least one robot")]
    EmptyTeam,

    #[error("robot index {index} is out of range for a team of {n_robots}")]
    RobotOutOfRange { index: usize, n_robots: usize },

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{what} is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemiDefinite {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("{what} is not symmetric (residual {residual:e})")]
    NotSymmetric { what: &'static str, residual: f64 },

    #[error("{what} is singular or too ill-conditioned to invert")]
    Singular { what: &'static str },

    #[error("robot {0} cannot measure itself")]
    SelfMeasurement(usize),

    #[error("measurement batch mixes timesteps {first} and {other}")]
    MixedTimesteps { first: u64, other: u64 },

    #[error("{size} candidates exceed the exhaustive-search limit of {limit}")]
    TooManyCandidates { size: usize, limit: usize },

    #[error("invalid sensor parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
