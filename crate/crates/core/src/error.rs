use thiserror::Error;

use crate::cachegrind::ProfileError;
use crate::domain::AccessClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or malformed input.
    Input,
    /// Input that parsed but violates a domain rule.
    Validation,
    /// Fitting or prediction could not be carried out.
    Modeling,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Profile(#[from] ProfileError),

    #[error("invalid event vector: {class} counts are not monotone (reference {reference}, L1 misses {l1_miss}, LL misses {ll_miss})")]
    InvalidEventVector {
        class: AccessClass,
        reference: u64,
        l1_miss: u64,
        ll_miss: u64,
    },

    #[error("invalid record `{id}`: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("duplicate record id `{0}`")]
    DuplicateId(String),

    #[error("invalid feature set: {0}")]
    InvalidFeatureSet(String),

    #[error("invalid capacitance model: {0}")]
    InvalidCapacitance(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("reference energy of record `{id}` must be positive, got {energy}")]
    InvalidReferenceEnergy { id: String, energy: f64 },

    #[error("record `{id}` does not provide feature {feature}")]
    IncompleteRecord { id: String, feature: String },

    #[error("input does not provide feature {0}")]
    IncompleteInput(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("underdetermined fit{context}: {rows} records for {cols} unknowns")]
    Underdetermined {
        rows: usize,
        cols: usize,
        context: String,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("fold count {k} out of range for {records} records")]
    FoldCount { k: usize, records: usize },

    #[error("fold plan does not match dataset: {0}")]
    FoldPlanMismatch(String),

    #[error("invalid generator spec: {0}")]
    InvalidGeneratorSpec(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Profile(_) | Error::EmptyDataset => ErrorKind::Input,
            Error::InvalidEventVector { .. }
            | Error::InvalidRecord { .. }
            | Error::DuplicateId(_)
            | Error::InvalidFeatureSet(_)
            | Error::InvalidCapacitance(_)
            | Error::InvalidReferenceEnergy { .. }
            | Error::FoldCount { .. }
            | Error::FoldPlanMismatch(_)
            | Error::InvalidGeneratorSpec(_) => ErrorKind::Validation,
            Error::Dimension(_)
            | Error::Degenerate(_)
            | Error::IncompleteRecord { .. }
            | Error::IncompleteInput(_)
            | Error::Underdetermined { .. }
            | Error::NonFinite(_) => ErrorKind::Modeling,
        }
    }
}
