use std::fmt;

use decode_energy::{Error, ErrorKind};

/// Failure of a command, carrying the class that decides the exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Validation(String),
    Modeling(String),
    Core(Error),
}

impl CliError {
    /// 2 for input and parse errors, 3 for validation, 4 for modeling.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Modeling(_) => 4,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Validation => 3,
                ErrorKind::Modeling => 4,
            },
        }
    }

    pub fn context(self, ctx: impl fmt::Display) -> CliError {
        let message = format!("{ctx}: {self}");
        match self.exit_code() {
            2 => CliError::Input(message),
            3 => CliError::Validation(message),
            _ => CliError::Modeling(message),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Validation(m) | CliError::Modeling(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
