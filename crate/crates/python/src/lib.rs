//! Python bindings: datasets, fitting, cross-validation, subset search,
//! cachegrind parsing and the synthetic generator.

use std::collections::BTreeMap;
use std::path::PathBuf;

use decode_energy as core;
use decode_energy::{EventKind, FeatureSet, FeatureValues, Predictor};
use decode_energy_cli::{dataset_file, model_file, CliError};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_error(e: CliError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind(symbol: &str) -> PyResult<EventKind> {
    EventKind::from_symbol(symbol).ok_or_else(|| PyKeyError::new_err(symbol.to_string()))
}

fn feature_set(features: &str) -> PyResult<FeatureSet> {
    FeatureSet::parse(features).map_err(value_error)
}

/// Nine event counts in canonical order `I_r, I_L1, I_LL, R_r, R_L1, R_LL, W_r, W_L1, W_LL`.
#[pyclass(module = "decode_energy", frozen, eq)]
#[derive(Clone, PartialEq)]
pub struct EventVector {
    inner: core::EventVector,
}

#[pymethods]
impl EventVector {
    #[new]
    fn new(counts: [u64; 9]) -> PyResult<Self> {
        let inner = core::EventVector::new(counts).map_err(value_error)?;
        Ok(EventVector { inner })
    }

    /// Builds a vector from `{symbol: count}`; missing kinds are zero.
    #[staticmethod]
    fn from_dict(counts: BTreeMap<String, u64>) -> PyResult<Self> {
        let mut array = [0u64; 9];
        for (s, c) in &counts {
            array[kind(s)?.index()] = *c;
        }
        let inner = core::EventVector::new(array).map_err(value_error)?;
        Ok(EventVector { inner })
    }

    #[getter]
    fn counts(&self) -> [u64; 9] {
        *self.inner.counts()
    }

    fn __getitem__(&self, symbol: &str) -> PyResult<u64> {
        Ok(self.inner.get(kind(symbol)?))
    }

    fn to_dict(&self) -> BTreeMap<String, u64> {
        self.inner
            .iter()
            .map(|(k, c)| (k.symbol().to_string(), c))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("EventVector({:?})", self.inner.counts())
    }
}

/// Measurement records with unique ids.
#[pyclass(module = "decode_energy", frozen)]
#[derive(Clone)]
pub struct Dataset {
    inner: core::Dataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        let inner = dataset_file::read_dataset(&path).map_err(cli_error)?;
        Ok(Dataset { inner })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        let inner = dataset_file::read_dataset_from(text.as_bytes()).map_err(cli_error)?;
        Ok(Dataset { inner })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        dataset_file::write_dataset(&self.inner, &path).map_err(cli_error)
    }

    fn to_csv(&self) -> String {
        dataset_file::dataset_to_string(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.ids().into_iter().map(String::from).collect()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies()
    }

    #[getter]
    fn decode_times(&self) -> Vec<f64> {
        self.inner.records().iter().map(|r| r.decode_time).collect()
    }

    /// Counts of one event kind across all records.
    fn column(&self, symbol: &str) -> PyResult<Vec<u64>> {
        let k = kind(symbol)?;
        Ok(self
            .inner
            .records()
            .iter()
            .map(|r| r.events.get(k))
            .collect())
    }

    fn events(&self, index: usize) -> PyResult<EventVector> {
        let r = self
            .inner
            .records()
            .get(index)
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(index))?;
        Ok(EventVector { inner: r.events })
    }

    fn __repr__(&self) -> String {
        format!("Dataset({} records)", self.inner.len())
    }
}

/// Fitted specific energies.
#[pyclass(module = "decode_energy", frozen)]
#[derive(Clone)]
pub struct Model {
    inner: core::ModelCoefficients,
}

#[pymethods]
impl Model {
    #[getter]
    fn features(&self) -> Vec<String> {
        self.inner
            .feature_set()
            .predictors()
            .iter()
            .map(|p| p.symbol().to_string())
            .collect()
    }

    #[getter]
    fn coefficients(&self) -> BTreeMap<String, f64> {
        self.inner
            .iter()
            .map(|(p, c)| (p.symbol().to_string(), c))
            .collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn trained_on(&self) -> String {
        self.inner.trained_on.clone()
    }

    /// Energy in joules for an `EventVector`, optionally with a decoding time.
    #[pyo3(signature = (events, time=None))]
    fn predict(&self, events: &EventVector, time: Option<f64>) -> PyResult<f64> {
        let mut values = FeatureValues::from_events(&events.inner);
        if let Some(t) = time {
            values.set(Predictor::DecodeTime, t);
        }
        core::predict(&self.inner, &values).map_err(value_error)
    }

    fn predict_dataset(&self, dataset: &Dataset) -> PyResult<Vec<f64>> {
        dataset
            .inner
            .records()
            .iter()
            .map(|r| core::predict_record(&self.inner, r).map_err(value_error))
            .collect()
    }

    fn to_json(&self) -> String {
        model_file::model_to_string(&self.inner)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = model_file::model_from_str(text).map_err(cli_error)?;
        Ok(Model { inner })
    }

    fn __repr__(&self) -> String {
        let terms: Vec<String> = self
            .inner
            .iter()
            .map(|(p, c)| format!("{}={}", p.symbol(), core::format_energy(c)))
            .collect();
        format!("Model({})", terms.join(", "))
    }
}

/// Least-squares fit of a preset (`1pe`, `4pe`, `9pe`, `time`) or a
/// comma-separated list of predictors.
#[pyfunction]
#[pyo3(signature = (dataset, features="4pe"))]
fn fit(dataset: &Dataset, features: &str) -> PyResult<Model> {
    let inner =
        core::fit_least_squares(&dataset.inner, &feature_set(features)?).map_err(value_error)?;
    Ok(Model { inner })
}

/// Pooled k-fold mean relative error and the per-record errors.
#[pyfunction]
#[pyo3(signature = (dataset, features="4pe", k=10, seed=0))]
fn cross_validate(
    dataset: &Dataset,
    features: &str,
    k: usize,
    seed: u64,
) -> PyResult<(f64, Vec<(String, f64)>)> {
    let plan = core::make_folds(&dataset.inner, k, seed).map_err(value_error)?;
    let report = core::cross_validate(&dataset.inner, &feature_set(features)?, &plan)
        .map_err(value_error)?;
    Ok((report.mean_relative_error, report.per_record))
}

/// `(features, error)` pairs, ascending by error.
type Ranking = Vec<(String, f64)>;

/// Best event subset of `size` and the full ranking as `(features, error)` pairs.
#[pyfunction]
#[pyo3(signature = (dataset, size=4, k=10, seed=0))]
fn select_subset(
    dataset: &Dataset,
    size: usize,
    k: usize,
    seed: u64,
) -> PyResult<(String, f64, Ranking)> {
    let plan = core::make_folds(&dataset.inner, k, seed).map_err(value_error)?;
    let s = core::select_subset(&dataset.inner, size, &plan).map_err(value_error)?;
    let ranking = s
        .ranking
        .iter()
        .map(|r| (r.features.to_string(), r.report.mean_relative_error))
        .collect();
    Ok((s.best.to_string(), s.report.mean_relative_error, ranking))
}

/// Correlation of each event count and of the decoding time with energy;
/// `None` where a column has no variance.
#[pyfunction]
fn correlate(dataset: &Dataset) -> PyResult<BTreeMap<String, Option<f64>>> {
    let report = core::correlation_report(&dataset.inner).map_err(value_error)?;
    let mut out: BTreeMap<String, Option<f64>> = report
        .entries()
        .map(|(k, r)| (k.symbol().to_string(), r))
        .collect();
    out.insert("time".into(), report.decode_time);
    Ok(out)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    core::pearson(&x, &y).map_err(value_error)
}

#[pyfunction]
fn mean_relative_error(predicted: Vec<f64>, actual: Vec<f64>) -> PyResult<f64> {
    core::mean_relative_error(&predicted, &actual)
        .map(|r| r.mean_relative_error)
        .map_err(value_error)
}

/// Event totals of a cachegrind output file.
#[pyfunction]
fn parse_profile(path: PathBuf) -> PyResult<EventVector> {
    let inner = core::read_profile(&path)
        .map_err(value_error)?
        .to_event_vector()
        .map_err(value_error)?;
    Ok(EventVector { inner })
}

/// Synthetic dataset from the instruction/write quartet, or from
/// `coefficients` (`{symbol: joules}`) when given.
#[pyfunction]
#[pyo3(signature = (records=100, noise=0.0, seed=0, coefficients=None, codec="SYN", decoder="synthetic"))]
fn generate(
    records: usize,
    noise: f64,
    seed: u64,
    coefficients: Option<BTreeMap<String, f64>>,
    codec: &str,
    decoder: &str,
) -> PyResult<Dataset> {
    let mut spec = core::GeneratorSpec {
        n_records: records,
        noise_sigma: noise,
        seed,
        codec: codec.into(),
        decoder: decoder.into(),
        ..core::GeneratorSpec::paper4()
    };
    if let Some(c) = coefficients {
        let pairs = c
            .iter()
            .map(|(s, e)| Ok((kind(s)?, *e)))
            .collect::<PyResult<Vec<_>>>()?;
        spec = spec.with_coefficients(pairs);
    }
    let inner = core::generate(&spec).map_err(value_error)?;
    Ok(Dataset { inner })
}

#[pymodule]
#[pyo3(name = "decode_energy")]
pub fn decode_energy_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<EventVector>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(select_subset, m)?)?;
    m.add_function(wrap_pyfunction!(correlate, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(mean_relative_error, m)?)?;
    m.add_function(wrap_pyfunction!(parse_profile, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
