use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to print a usable
/// one-line diagnostic from the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate URL in snapshot: {0}")]
    DuplicateUrl(String),

    #[error("seed URL not present in snapshot pages: {0}")]
    MissingSeed(String),

    #[error("page not found in snapshot: {0}")]
    NotFound(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("empty corpus: cannot fit a vocabulary over zero documents")]
    EmptyCorpus,

    #[error("training corpus contains a single class: need at least one relevant and one irrelevant document")]
    SingleClass,

    #[error("oracle is in labels mode but snapshot has no label for {0}")]
    MissingLabel(String),

    #[error("traces reference different snapshots: {0} vs {1}")]
    SnapshotMismatch(String, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fetch failed for {url}: {reason}")]
    Fetch { url: String, reason: String },

    #[error("trace cannot be replayed exactly: {0}")]
    Unreplayable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
