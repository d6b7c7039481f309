use std::path::PathBuf;

use thiserror::Error;
use tubal::TensorError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed file at byte {offset}: {reason}", path.display())]
    Format { path: PathBuf, offset: u64, reason: String },
    #[error("{0}")]
    Tensor(#[from] TensorError),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }

    /// Process exit status: 2 usage, 3 IO and file format, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Io { .. } | BenchError::Format { .. } => 3,
            BenchError::Tensor(e) => match e {
                TensorError::InvalidParameter(_)
                | TensorError::RankTooLarge { .. }
                | TensorError::InvalidDims(_)
                | TensorError::InsufficientSupport { .. }
                | TensorError::IndexOutOfRange { .. } => 2,
                _ => 4,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
