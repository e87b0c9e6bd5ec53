use std::fmt;
use std::path::Path;

/// CLI failure with its process exit code.
///
/// 0 success, 2 usage or malformed input, 3 model error, 4 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input { context: String, message: String },
    Model(mprs_core::Error),
    Numerical(mprs_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Model(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn input(path: &Path, line: usize, message: impl Into<String>) -> Self {
        CliError::Input {
            context: format!("{}:{line}", path.display()),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Input {
            context: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Input { context, message } => write!(f, "error: {context}: {message}"),
            CliError::Model(e) => write!(f, "model error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl From<mprs_core::Error> for CliError {
    fn from(e: mprs_core::Error) -> Self {
        match e {
            mprs_core::Error::FactorizationFailure => CliError::Numerical(e),
            // parameters out of domain are an input problem, not a model one
            mprs_core::Error::InvalidParameter(msg) => CliError::Usage(msg),
            _ => CliError::Model(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
