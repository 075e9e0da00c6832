use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A syntax or semantic error in one of the input files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}: {source}")]
    Parse {
        file: String,
        #[source]
        source: ParseError,
    },

    #[error("polynomial is not multihomogeneous in group {group}: {detail}")]
    NotMultihomogeneous { group: usize, detail: String },

    #[error("declared degree {} ≠ computed {} for {name}", tuple(.declared), tuple(.computed))]
    DegreeMismatch {
        name: String,
        declared: Vec<u32>,
        computed: Vec<u32>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix (pivot {pivot:e} below threshold)")]
    Singular { pivot: f64 },

    #[error("homotopy is not square: {equations} equations for {variables} unknowns")]
    NotSquare { equations: usize, variables: usize },

    #[error("root witness system stayed singular after {0} draws")]
    DegenerateRoot(usize),

    #[error("duplicate point id {0}")]
    DuplicatePointId(String),

    #[error("missing input file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn tuple(d: &[u32]) -> String {
    let parts: Vec<String> = d.iter().map(u32::to_string).collect();
    format!("({})", parts.join(", "))
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
