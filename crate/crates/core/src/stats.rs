//! Correlation and relative-error statistics.

use crate::domain::{CorrelationReport, Dataset, ErrorReport, EventKind, Predictor};
use crate::error::{Error, Result};

/// Sample Pearson correlation of `x` and `y`.
///
/// Uses two passes (means first, then centred sums) so that counts around
/// 10^10 do not cancel catastrophically. Inputs with zero variance are an
/// error rather than a silent zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "pearson on vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate(format!(
            "pearson needs at least 2 samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pearson input".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;

    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("first vector has zero variance".into()));
    }
    if syy == 0.0 {
        return Err(Error::Degenerate("second vector has zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of every event count, and of the decoding time, with the
/// measured energy. Columns without variance are left undefined.
pub fn correlation_report(dataset: &Dataset) -> Result<CorrelationReport> {
    if dataset.len() < 2 {
        return Err(Error::Degenerate(format!(
            "correlation needs at least 2 records, got {}",
            dataset.len()
        )));
    }
    let energy = dataset.energies();
    // a constant energy column makes every entry undefined
    pearson(&energy, &energy)?;

    let column = |p: Predictor| -> Option<f64> {
        let values: Vec<f64> = dataset.records().iter().map(|r| r.feature(p)).collect();
        pearson(&values, &energy).ok()
    };
    let mut entries = [None; 9];
    for kind in EventKind::ALL {
        entries[kind.index()] = column(Predictor::Event(kind));
    }
    Ok(CorrelationReport::new(
        entries,
        column(Predictor::DecodeTime),
    ))
}

/// Mean relative error of `predicted` against `actual`, with records labelled
/// by their index.
pub fn mean_relative_error(predicted: &[f64], actual: &[f64]) -> Result<ErrorReport> {
    let ids: Vec<String> = (0..actual.len()).map(|i| i.to_string()).collect();
    relative_errors(&ids, predicted, actual)
}

/// Per-record `|predicted - actual| / actual` and their arithmetic mean.
pub fn relative_errors<S: AsRef<str>>(
    ids: &[S],
    predicted: &[f64],
    actual: &[f64],
) -> Result<ErrorReport> {
    if predicted.len() != actual.len() || ids.len() != actual.len() {
        return Err(Error::Dimension(format!(
            "{} ids, {} predictions, {} measurements",
            ids.len(),
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per_record = ids
        .iter()
        .zip(predicted.iter().zip(actual))
        .map(|(id, (&p, &a))| {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::InvalidReferenceEnergy {
                    id: id.as_ref().to_string(),
                    energy: a,
                });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite(format!(
                    "prediction for `{}`",
                    id.as_ref()
                )));
            }
            Ok((id.as_ref().to_string(), (p - a).abs() / a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::from_errors(per_record))
}
