use std::process::ExitCode;

/// Bad flags, unreadable inputs or configurations the solver rejects.
pub const EXIT_USAGE: u8 = 64;
/// A numerical failure or a result that never converged.
pub const EXIT_UNCONVERGED: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Solver(#[from] coeffzero::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use coeffzero::Error as E;
        match self {
            CliError::Usage(_) => ExitCode::from(EXIT_USAGE),
            CliError::Solver(
                E::Config(_) | E::Input(_) | E::Parse { .. } | E::Unsupported(_) | E::Derivation(_),
            ) => ExitCode::from(EXIT_USAGE),
            CliError::Solver(_) => ExitCode::from(EXIT_UNCONVERGED),
        }
    }
}
