use std::fmt;
use std::path::Path;

use large_core::LargeError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input.
    Input(String),
    Solver(LargeError),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LargeError> for CliError {
    fn from(e: LargeError) -> Self {
        CliError::Solver(e)
    }
}
