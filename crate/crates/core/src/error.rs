use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the CLI exit-code classes: `Contract`, `Shape` and
/// `Config` are caller mistakes, `Domain` and `Parse`/`Io` are data problems,
/// and `Numerical` flags a computation that left the finite reals.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl Error {
    /// Process exit status for this error class: 1 for usage and
    /// configuration mistakes, 2 for bad data, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) | Error::Shape { .. } | Error::Config(_) => 1,
            Error::Domain(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}
