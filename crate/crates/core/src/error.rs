use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps these onto exit codes: parse errors to 2, precondition
/// violations to 3 and cap overflows to 4.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("point cap exceeded: {needed} points requested, cap is {cap}")]
    CapOverflow { needed: String, cap: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("mixed quadratic fields: sqrt({0}) and sqrt({1})")]
    MixedRadicals(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
}

impl Error {
    pub(crate) fn parse(column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line: 1,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// Shift a parse error to a different line, leaving other variants alone.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { column, message, .. } => Error::Parse { line, column, message },
            other => other,
        }
    }

    /// Offset the column of a parse error, used when a field is parsed out of a
    /// larger string.
    pub fn shifted(self, offset: usize) -> Self {
        match self {
            Error::Parse { line, column, message } => Error::Parse {
                line,
                column: column + offset,
                message,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
