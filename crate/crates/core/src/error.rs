use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("instance too large for brute-force enumeration: {0}")]
    Scale(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported MPS feature: {0}")]
    Unsupported(String),

    #[error("rejected instance: {0}")]
    Rejected(String),

    #[error("stream exhausted: needed {needed} members, found {found} after skipping {skipped}")]
    Exhausted {
        needed: usize,
        found: usize,
        skipped: usize,
    },

    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what}: length {got}, expected {want}")));
    }
    Ok(())
}
