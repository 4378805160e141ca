use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input at position {position}: {reason}")]
    Malformed { position: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("frame index {got} does not follow {previous}")]
    NonMonotone { previous: u64, got: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("bad magic bytes {found:?}, expected \"ONIS\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated {what} at byte offset {offset}")]
    Truncated { what: &'static str, offset: u64 },

    #[error("invalid stream data at byte offset {offset}: {reason}")]
    InvalidData { offset: u64, reason: String },

    #[error("line {line}: {reason}")]
    InvalidLine { line: usize, reason: String },

    #[error("frame {0} has no entry in the label map")]
    MissingLabel(u64),

    #[error("human sample is empty")]
    EmptyHumanSample,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
