use thiserror::Error;

/// Errors raised anywhere in the coreset pipeline.
#[derive(Debug, Error)]
pub enum CoresetError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("capacity exceeded: {what} needs {requested} entries, budget is {budget}")]
    Capacity {
        what: String,
        requested: u128,
        budget: u128,
    },

    #[error("rank deficiency: requested rank {requested}, numerical rank is {available}")]
    Rank { requested: usize, available: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<CoresetError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoresetError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoresetError::InvalidInput(msg.into())
    }

    /// Attach the index of the stream row that triggered the error.
    pub fn at_row(self, row: usize) -> Self {
        match self {
            e @ CoresetError::AtRow { .. } => e,
            e => CoresetError::AtRow {
                row,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoresetError::InvalidInput(_)
            | CoresetError::DimensionMismatch { .. }
            | CoresetError::MissingParameter(_)
            | CoresetError::Io(_) => 2,
            CoresetError::Capacity { .. } => 3,
            CoresetError::Rank { .. } | CoresetError::Decomposition(_) => 4,
            CoresetError::AtRow { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoresetError>;
