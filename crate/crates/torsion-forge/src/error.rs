use std::fmt;

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or out-of-domain input (exit 2).
    Input(String),
    /// A cross-check exceeded the tolerance or a computation broke down (exit 3).
    Verification(String),
    /// The filling solver failed (exit 4).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<torsion_forge::Error> for CliError {
    fn from(e: torsion_forge::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else if e.is_solver_error() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Verification(e.to_string())
        }
    }
}
