use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numeric(eit_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn numeric(e: eit_core::Error) -> Self {
        use eit_core::Error as E;
        match e {
            // bad inputs that reached the core unchecked
            E::InvalidParameter { .. } | E::Range { .. } | E::Validity { .. } => CliError::Config(e.to_string()),
            E::DegenerateData(_) | E::TooFewSamples { .. } | E::NoDip(_) | E::Ambiguous { .. } => {
                CliError::Data(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }

    pub fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}
