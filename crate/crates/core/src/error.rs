use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("schema: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("centre ({x}, {y}) is within {border} pixels of the image border")]
    OutOfBounds { x: usize, y: usize, border: usize },

    #[error("LBP region {region} (row {row}, column {col}) contains no valid centre pixel")]
    DegenerateRegion {
        region: usize,
        row: usize,
        col: usize,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("model format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Argument(_) => "argument",
            Error::Data(_) => "data",
            Error::Training { .. } => "training",
            Error::OutOfBounds { .. } => "out-of-bounds",
            Error::DegenerateRegion { .. } => "degenerate-region",
            Error::Image { .. } => "image",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
