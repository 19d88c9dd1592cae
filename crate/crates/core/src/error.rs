use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("could not draw a connected random graph after {0} attempts")]
    ResampleCapExceeded(usize),

    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),

    #[error("function has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("function must be positive at vertex {vertex} (value {value})")]
    NonPositive { vertex: usize, value: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("profile domain violated: {0}")]
    ProfileDomain(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
