use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("invalid sector: {field}: {reason}")]
    InvalidSector { field: String, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("bearing between coincident points is undefined")]
    CoincidentPoints,

    #[error("fix {0} is not an entry fix of this sector")]
    NotEntryFix(String),

    #[error("aircraft {0} has already exited the sector")]
    AircraftExited(String),

    #[error("invalid command: {0}")]
    InvalidCommand(String),

    #[error("scenario generation rejected {0} consecutive candidates; sector too small")]
    GenerationExhausted(usize),

    #[error("action index {index} out of range for {space} action space (size {size})")]
    ActionOutOfRange {
        index: usize,
        space: &'static str,
        size: usize,
    },

    #[error("scenario kind {scenario} is incompatible with {space} action space")]
    KindMismatch {
        scenario: &'static str,
        space: &'static str,
    },

    #[error("episode already finished")]
    EpisodeDone,

    #[error("non-finite loss during update: {0}")]
    NonFiniteLoss(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("incompatible checkpoints: {0}")]
    Incompatible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, message: impl ToString) -> Self {
        Error::Parse {
            what,
            message: message.to_string(),
        }
    }

    pub(crate) fn sector(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSector {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
