use std::process::ExitCode;

/// Failure of a command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or command combination.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or inconsistent input files.
    #[error("{0}")]
    Data(String),
    /// Training diverged or a metric was undefined.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Data(_) => Self::DATA,
            CliError::Numerical(_) => Self::NUMERICAL,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<morpi::Error> for CliError {
    fn from(e: morpi::Error) -> Self {
        match e {
            morpi::Error::Config(_) => CliError::Usage(e.to_string()),
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
