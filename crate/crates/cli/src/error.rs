use thiserror::Error;

/// Failures of a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input: exit code 3.
    #[error("input error: {0}")]
    Input(String),

    /// The engine could not complete the computation: exit code 2.
    #[error("numeric error: {0}")]
    Numeric(jetcalc::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<jetcalc::Error> for CliError {
    fn from(e: jetcalc::Error) -> Self {
        use jetcalc::Error as E;
        match e {
            E::Parse(_) | E::OutOfRange { .. } | E::SpaceMismatch(_) | E::InvalidArgument(_) => {
                CliError::Input(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            CliError::Input(_) | CliError::Io { .. } => 3,
        }
    }
}
