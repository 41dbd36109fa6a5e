use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("rank deficient input: rank {rank} < {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("inconsistent pairing: inner products differ by up to {max_violation:e}")]
    Inconsistent { max_violation: f64 },

    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("indeterminate feasibility: best violation {violation:e} inside ambiguous band")]
    Indeterminate { violation: f64 },

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json { .. } | Error::Schema { .. } | Error::Io(_) => 1,
            Error::Dimension { .. }
            | Error::Precondition(_)
            | Error::Unsupported(_)
            | Error::RankDeficient { .. }
            | Error::Inconsistent { .. }
            | Error::CapExceeded(_) => 2,
            Error::NonConvergence { .. } | Error::Numerical(_) => 3,
            Error::Indeterminate { .. } => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
