use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or an invalid config; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Writing artifacts failed; exit status 1.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 1,
        }
    }
}
