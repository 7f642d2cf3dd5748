//! Estimation of software video-decoder energy from processor event counts.
//!
//! Event totals come from cachegrind profiles ([`cachegrind`]); the energy of
//! a decoding run is modelled as a linear combination of event counts with
//! per-event specific energies ([`model`]), fitted by least squares and
//! assessed by k-fold cross-validation of the mean relative error
//! ([`validation`]). [`synthetic`] produces datasets with known coefficients.

pub mod cachegrind;
pub mod domain;
pub mod error;
pub mod model;
pub mod stats;
pub mod synthetic;
pub mod validation;

pub use cachegrind::{parse_profile, read_profile, CachegrindProfile, ProfileError};
pub use domain::{
    derive_hits, format_energy, AccessClass, CacheLevel, CapacitanceModel, CorrelationReport,
    Dataset, ErrorReport, EventKind, EventVector, FeatureSet, FeatureValues, HitLevel,
    MeasurementRecord, ModelCoefficients, Predictor,
};
pub use error::{Error, ErrorKind, Result};
pub use model::{
    build_design_matrix, capacitance_energy, capacitance_equivalence, fit_least_squares,
    fit_with_options, in_sample_residual, predict, predict_events, predict_record, DesignMatrix,
    FitOptions,
};
pub use stats::{correlation_report, mean_relative_error, pearson};
pub use synthetic::{generate, GeneratorSpec};
pub use validation::{
    compare_models, cross_validate, make_folds, select_subset, ComparisonTable, FoldPlan,
    ModelColumn, SubsetSelection,
};
