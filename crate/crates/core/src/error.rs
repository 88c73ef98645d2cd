use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Dataset contents cannot support the requested operation.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    /// Structural problem in an input file (CSV row shape, model file layout).
    #[error("format error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Format { row: Option<usize>, message: String },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("unsupported model file version {found} (this build reads up to version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("training diverged at epoch {epoch} ({config}): loss is not finite")]
    Diverged { epoch: usize, config: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn format(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Format {
            row,
            message: message.into(),
        }
    }

    /// Process exit code used by the CLI: 2 config, 3 data, 4 diverged.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape { .. } | Error::InvalidArgument(_) => 2,
            Error::Data(_)
            | Error::Io { .. }
            | Error::Format { .. }
            | Error::Parse { .. }
            | Error::UnsupportedVersion { .. } => 3,
            Error::Diverged { .. } => 4,
        }
    }
}
