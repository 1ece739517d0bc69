use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InitialData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A spatial query fell outside the range a field is stored on. Inside the
    /// engines this means the domain padding was too small.
    #[error("x = {x} outside field range [{min}, {max}]")]
    OutOfRange { x: f64, min: f64, max: f64 },

    #[error("time {t} outside history span [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("density support reached the grid boundary at t = {t}")]
    SupportAtBoundary { t: f64 },

    #[error("scenario hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
