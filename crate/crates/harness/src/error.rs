use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] dfine_core::Error),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("model changed during the run ({before} -> {after})")]
    ModelMutated { before: String, after: String },
}

impl Error {
    /// Bad input (configuration, files, shapes) rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        use dfine_core::Error as E;
        match self {
            Error::Invalid(_) | Error::Json(_) => true,
            Error::Core(e) => matches!(
                e,
                E::Config(_)
                    | E::Dimension(_)
                    | E::LabelOutOfRange { .. }
                    | E::Corrupt(_)
                    | E::Version { .. }
                    | E::Format(_)
                    | E::EmptyDataset
            ),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
