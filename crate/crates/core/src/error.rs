use std::path::PathBuf;

use crate::class::Family;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not place mandatory {family} instance after {attempts} attempts")]
    SceneGeneration { family: Family, attempts: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("pose library line {line}: {reason}")]
    PoseLibrary { line: usize, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown experiment `{0}` (valid: noise, split, modeling)")]
    UnknownExperiment(String),

    #[error("label space of {0} labelings is too large to enumerate")]
    LabelSpaceTooLarge(u128),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format { path: path.into(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
