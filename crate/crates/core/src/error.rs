use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),

    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("answer offset mismatch in example {id}: expected {expected:?} at {start}, found {found:?}")]
    OffsetMismatch {
        id: String,
        start: usize,
        expected: String,
        found: String,
    },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),

    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: usize, len: usize },

    #[error("span {start}..{end} covers no token")]
    UnmappableSpan { start: usize, end: usize },

    #[error("invalid loss input: {0}")]
    InvalidLossInput(String),

    #[error("example {0} is not eligible: it already contains a negation marker")]
    IneligibleExample(String),

    #[error("insufficient data: need {needed} {what} examples, only {available} available")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported format {0:?}")]
    UnsupportedFormat(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergenceDetected { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }
}
