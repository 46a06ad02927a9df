use thiserror::Error;

/// Failure of a command, carrying its process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or options.
    #[error("{0}")]
    Usage(String),
    /// Input or config file could not be read or parsed.
    #[error("{0}")]
    Parse(String),
    /// Output could not be written.
    #[error("{0}")]
    Io(String),
    /// The model was rejected by graph construction or derivation. The
    /// message starts with the error name.
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    NonFinite(String),
    #[error("AllPenalised: every individual in every generation scored the penalty fitness")]
    AllPenalised,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Model(_) => 2,
            CliError::NonFinite(_) => 3,
            CliError::AllPenalised => 4,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}
