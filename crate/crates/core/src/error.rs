use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Variable count or table length outside what a routine supports.
    #[error("size error: {0}")]
    Size(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A value violates a documented type invariant (e.g. a noise term outside its box).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("non-finite loss at iteration {iteration}")]
    Numerical { iteration: usize },

    #[error("parse error in {file} at byte {offset}: {message}")]
    Parse {
        file: String,
        offset: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
