use gbs_core::GbsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] GbsError),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 3 for a failed or impossible verification, 1 for
    /// anything the caller cannot fix by changing arguments.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                GbsError::InvalidParameter { .. }
                | GbsError::IndexOutOfRange { .. }
                | GbsError::NonFinite
                | GbsError::TruncationTooSmall { .. }
                | GbsError::DisentanglingSingular { .. } => 2,
                _ => 3,
            },
            CliError::Verification(_) => 3,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}
