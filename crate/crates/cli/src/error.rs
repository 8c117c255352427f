use std::fmt;

/// Failure of a pipeline stage, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or a precondition the configuration should have met.
    Config(String),
    /// Unreadable, unwritable or malformed files.
    Io(String),
    /// A numerical routine failed.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dirflow::Error> for CliError {
    fn from(e: dirflow::Error) -> Self {
        match e {
            dirflow::Error::Domain(m) => CliError::Config(m),
            dirflow::Error::Numeric(m) => CliError::Numeric(m),
            dirflow::Error::Parse(m) => CliError::Io(format!("parse: {m}")),
            dirflow::Error::Io(e) => CliError::Io(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
