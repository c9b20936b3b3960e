use thiserror::Error;

/// Failure of a CLI invocation, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("invalid model file: {0}")]
    ModelFile(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] noether_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use noether_core::Error as E;
        match self {
            CliError::Io(..) | CliError::ModelFile(_) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::Invariant(_)
                | E::NotExact { .. }
                | E::NotPolynomial(_)
                | E::OrderBoundExceeded { .. }
                | E::Cancelled => 3,
                _ => 2,
            },
        }
    }
}
