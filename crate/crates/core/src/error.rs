use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} of {requested} exceeds the supported limit of {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("problem size KQ = {kq:.3e} exceeds the level-3 capacity {capacity:.3e}")]
    Infeasible { kq: f64, capacity: f64 },

    #[error(
        "base net of word length {base_length} is too coarse (order-0 error {achieved:.3e}, \
         convergence radius {radius:.3e}); rebuild with base length >= {required_length}"
    )]
    BaseNetTooCoarse {
        base_length: usize,
        required_length: usize,
        achieved: f64,
        radius: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
