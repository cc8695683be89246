use std::path::PathBuf;

/// Errors produced by the representation and learning pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error: duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("composition error: {0}")]
    Composition(String),

    #[error("integrity error: entity index {index} out of range (store has {len} rows)")]
    Integrity { index: usize, len: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
