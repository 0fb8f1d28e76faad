use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unparsable molecule `{smiles}`: {reason}")]
    UnparsableMolecule { smiles: String, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("fingerprint keys do not match dataset rows: {0}")]
    KeyMismatch(String),

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("molecule `{0}` has no row in a required external fingerprint file")]
    MissingExternalFingerprint(String),

    #[error("molecule `{key}` conflicts with existing row `{existing}` (different label)")]
    ConflictingLabel { key: String, existing: String },

    #[error("unknown label `{0}` for this library")]
    UnknownLabel(String),

    #[error("dataset has {0} usable rows; at least 2 are required")]
    EmptyDataset(usize),

    #[error("invalid library: {0}")]
    InvalidLibrary(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stratification impossible: {0}")]
    StratificationImpossible(String),

    #[error("no cluster assignment satisfies class coverage: {0}")]
    ClassCoverageImpossible(String),

    #[error("ROC AUC undefined: scores contain a single class")]
    SingleClass,

    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn unparsable(smiles: &str, reason: impl Into<String>) -> Self {
        Error::UnparsableMolecule {
            smiles: smiles.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error indicates a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
