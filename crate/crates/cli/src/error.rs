use std::fmt;

use doublesel::Error as CoreError;

/// A failure with its process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Argument(String),
    Data(String),
    Estimation(String),
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Data(_) => 3,
            CliError::Estimation(_) => 4,
            CliError::Capacity(_) => 5,
        }
    }

    /// Prefixes the message with `context: `.
    pub fn context(self, context: &str) -> Self {
        let wrap = |m: String| format!("{context}: {m}");
        match self {
            CliError::Argument(m) => CliError::Argument(wrap(m)),
            CliError::Data(m) => CliError::Data(wrap(m)),
            CliError::Estimation(m) => CliError::Estimation(wrap(m)),
            CliError::Capacity(m) => CliError::Capacity(wrap(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Argument(m) => ("argument error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Estimation(m) => ("estimation error", m),
            CliError::Capacity(m) => ("capacity error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Argument(m) | CoreError::Domain(m) => CliError::Argument(m),
            CoreError::Estimation(m) => CliError::Estimation(m),
            c @ CoreError::Capacity { .. } => CliError::Capacity(c.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
