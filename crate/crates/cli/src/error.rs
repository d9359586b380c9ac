use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration and validation errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures and failed identities.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] casimir_born::Error),

    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) if is_numerical(e) => EXIT_NUMERICAL,
            Self::Io { .. } | Self::Output(_) => 1,
            _ => EXIT_CONFIG,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Self::Core(e) if is_numerical(e))
    }
}

/// Failures of the numerics, as opposed to rejected inputs.
pub fn is_numerical(e: &casimir_born::Error) -> bool {
    use casimir_born::Error as E;
    matches!(
        e,
        E::ToleranceNotReached { .. } | E::NonConvergentExtrapolation { .. }
    )
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Output(e.to_string())
    }
}
