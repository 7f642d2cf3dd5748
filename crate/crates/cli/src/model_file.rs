//! Model files: the trained coefficients as a small JSON document.

use std::path::Path;

use decode_energy::{FeatureSet, ModelCoefficients, Predictor};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    /// Predictor symbols in canonical order.
    feature_set: Vec<String>,
    /// Joules per event (or watts for decoding time), aligned with `feature_set`.
    coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    trained_on: String,
    warnings: Vec<String>,
}

pub fn model_to_string(model: &ModelCoefficients) -> String {
    let doc = ModelDocument {
        format_version: FORMAT_VERSION,
        feature_set: model
            .feature_set()
            .predictors()
            .iter()
            .map(|p| p.symbol().to_string())
            .collect(),
        coefficients: model.coefficients().to_vec(),
        intercept: model.intercept(),
        trained_on: model.trained_on.clone(),
        warnings: model.warnings.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
    text.push('\n');
    text
}

pub fn model_from_str(text: &str) -> Result<ModelCoefficients, CliError> {
    let doc: ModelDocument =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("model file: {e}")))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(CliError::Input(format!(
            "model file: unsupported format_version {}",
            doc.format_version
        )));
    }
    let predictors = doc
        .feature_set
        .iter()
        .map(|s| {
            Predictor::from_symbol(s)
                .ok_or_else(|| CliError::Input(format!("model file: unknown predictor `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let features = FeatureSet::new(predictors.iter().copied())
        .map_err(|e| CliError::Input(format!("model file: {e}")))?;
    if features.predictors() != predictors.as_slice() {
        return Err(CliError::Input(
            "model file: feature_set is not in canonical order".into(),
        ));
    }
    let model = ModelCoefficients::new(features, doc.coefficients, doc.trained_on, doc.warnings)
        .map_err(|e| CliError::Input(format!("model file: {e}")))?;
    match doc.intercept {
        Some(b) => model
            .with_intercept(b)
            .map_err(|e| CliError::Input(format!("model file: {e}"))),
        None => Ok(model),
    }
}

pub fn read_model(path: &Path) -> Result<ModelCoefficients, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    model_from_str(&text)
}

pub fn write_model(model: &ModelCoefficients, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, model_to_string(model))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
