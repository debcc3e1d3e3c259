use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed type `{token}`: {reason}")]
    MalformedType { token: String, reason: String },

    #[error("invalid base type name `{0}`")]
    InvalidBase(String),

    #[error("{source_name}:{line}: {message}")]
    Syntax {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("no tensor for word `{word}` with type `{ty}`")]
    MissingTensor { word: String, ty: String },

    #[error("input of length {len} exceeds brute-force limit of {limit}")]
    InputTooLong { len: usize, limit: usize },

    #[error("invalid link ({i}, {j}): {reason}")]
    InvalidLink { i: usize, j: usize, reason: String },

    #[error("unknown filler `{0}`")]
    UnknownFiller(String),

    #[error("duplicate filler `{0}`")]
    DuplicateFiller(String),

    #[error("path of depth {depth} exceeds maximum depth {depth_max}")]
    DepthExceeded { depth: usize, depth_max: usize },

    #[error("child index {index} out of range for arity {arity}")]
    ArityExceeded { index: usize, arity: usize },

    #[error("structure spaces do not match")]
    SpaceMismatch,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch for base `{base}`: expected {expected}, found {found}")]
    DimMismatch {
        base: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),
}

impl Error {
    /// Unknown words and missing tensors are problems with the data being
    /// processed rather than with configuration files.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::UnknownWord(_) | Error::MissingTensor { .. })
    }

    pub(crate) fn syntax(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
