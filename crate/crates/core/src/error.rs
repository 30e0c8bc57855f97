use thiserror::Error;

/// Errors raised by argument validation, containers and file parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown leaf label {0}")]
    UnknownLabel(usize),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("instance too small: need at least {required} labels, got {actual}")]
    TooSmall { required: usize, actual: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed tree: {0}")]
    Tree(String),

    #[error(
        "star relation is not transitive: *({a},{b}) and *({a},{c}) hold but *({b},{c}) does not"
    )]
    NotClique { a: usize, b: usize, c: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub(crate) fn require_size(actual: usize, required: usize) -> Result<()> {
    if actual < required {
        Err(Error::TooSmall { required, actual })
    } else {
        Ok(())
    }
}
