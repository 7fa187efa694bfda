use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch {}x{} vs {}x{}", .left.0, .left.1, .right.0, .right.1)]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("backward requires a 1x1 loss, got {0}x{1}")]
    NonScalarLoss(usize, usize),
    #[error("backward already ran on this tape; start a new tape")]
    BackwardTwice,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("weight ({0}, {1}) is nonzero but the edge is not in the graph")]
    SupportViolation(usize, usize),
    #[error("{}:{line}: {msg}", .file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("missing distilled targets for instances {0:?}")]
    MissingTargets(Vec<usize>),
    #[error("stage `{0}` has not been run (missing {1})")]
    MissingStage(&'static str, String),
    #[error("stage `{0}` is out of date for this config or its inputs; rerun it")]
    StaleStage(&'static str),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Shape { op, left, right }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
