use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes; the CLI maps each one onto a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Data,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("row count mismatch: header declares {declared} rows, found {found}")]
    RowCountMismatch { declared: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector for word {word:?}")]
    ZeroNorm { word: String },

    #[error("non-finite component in vector for word {word:?}")]
    NonFinite { word: String },

    #[error("invalid word {word:?}: words must be nonempty and contain no whitespace")]
    InvalidWord { word: String },

    #[error("duplicate word {word:?}")]
    DuplicateWord { word: String },

    #[error("empty embedding space")]
    EmptySpace,

    #[error("words missing from {space}: {}", words.join(", "))]
    MissingWords { space: String, words: Vec<String> },

    #[error("cosine excursion outside [-1, 1]: {0}")]
    CosineOutOfRange(f64),

    #[error("no common anchors between {source_label} and {target_label}")]
    NoAnchors {
        source_label: String,
        target_label: String,
    },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("degenerate association distribution: all values identical")]
    DegenerateDistribution,

    #[error("invalid wordset: {0}")]
    InvalidWordset(String),

    #[error("invalid permutation settings: {0}")]
    InvalidPermutation(String),

    #[error("frequency table: {0}")]
    Frequency(String),

    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Aggregate(Vec<Error>),

    #[error("configuration invalid:\n{}", .0.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigIssue>),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Collapses a list of errors: none is `Ok`, one is returned as is.
    pub fn collect(mut errors: Vec<Error>) -> Result<()> {
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.remove(0)),
            _ => Err(Error::Aggregate(errors)),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Config(_) | Error::InvalidPermutation(_) => ErrorClass::Validation,
            Error::Aggregate(errors) => errors
                .iter()
                .map(Error::class)
                .max_by_key(|c| match c {
                    ErrorClass::Validation => 0,
                    ErrorClass::Data => 1,
                    ErrorClass::Io => 2,
                })
                .unwrap_or(ErrorClass::Data),
            _ => ErrorClass::Data,
        }
    }
}

/// One problem found while validating a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// Dotted path to the offending field, e.g. `embeddings[1].label`.
    pub field: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}
