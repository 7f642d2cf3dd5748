//! Linear specific-energy models.
//!
//! Energy is modelled as a dot product of predictor values and per-event
//! specific energies, `E = sum(n_pe * e_pe)`, without an intercept by default
//! because measured energies already have the idle baseline removed. The
//! capacitance model `E = C * V^2 * instructions` is the one-predictor case
//! over the instruction count.

use nalgebra::{DMatrix, DVector};

use crate::domain::{
    CapacitanceModel, Dataset, EventVector, FeatureSet, FeatureValues, MeasurementRecord,
    ModelCoefficients, Predictor,
};
use crate::error::{Error, Result};

/// Row-major `M x K` predictor matrix with the matching energy targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    targets: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols || targets.len() != rows {
            return Err(Error::Dimension(format!(
                "{} values and {} targets for a {rows}x{cols} design",
                values.len(),
                targets.len()
            )));
        }
        Ok(DesignMatrix {
            rows,
            cols,
            values,
            targets,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Matrix restricted to the given rows, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        DesignMatrix {
            rows: rows.len(),
            cols: self.cols,
            values,
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Matrix restricted to the given columns, in that order.
    pub fn select_cols(&self, cols: &[usize]) -> DesignMatrix {
        let mut values = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        DesignMatrix {
            rows: self.rows,
            cols: cols.len(),
            values,
            targets: self.targets.clone(),
        }
    }

    fn with_ones_column(&self) -> DesignMatrix {
        let mut values = Vec::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            values.extend_from_slice(self.row(i));
            values.push(1.0);
        }
        DesignMatrix {
            rows: self.rows,
            cols: self.cols + 1,
            values,
            targets: self.targets.clone(),
        }
    }
}

/// Lays out the feature values of every record (feature-set order) and the
/// measured energies. No intercept column is added.
pub fn build_design_matrix(dataset: &Dataset, features: &FeatureSet) -> Result<DesignMatrix> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cols = features.len();
    let mut values = Vec::with_capacity(dataset.len() * cols);
    for record in dataset.records() {
        for &p in features.predictors() {
            if p == Predictor::DecodeTime
                && (record.decode_time.is_nan() || record.decode_time <= 0.0)
            {
                return Err(Error::IncompleteRecord {
                    id: record.id.clone(),
                    feature: "time (decode time must be positive)".into(),
                });
            }
            values.push(record.feature(p));
        }
    }
    DesignMatrix::new(dataset.len(), cols, values, dataset.energies())
}

/// Least-squares solution of `A x ~ b` and the numerical rank of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution {
    pub coefficients: Vec<f64>,
    pub rank: usize,
}

/// Solves `min ||A x - b||` by Householder QR with column pivoting on the
/// column-normalised matrix. A rank-deficient matrix gets the minimum-norm
/// solution (in normalised coordinates) from an SVD instead.
pub fn solve_least_squares(design: &DesignMatrix) -> Result<LeastSquaresSolution> {
    let (m, n) = (design.rows, design.cols);
    if n == 0 {
        return Err(Error::Dimension("design has no columns".into()));
    }
    if m < n {
        return Err(Error::Underdetermined {
            rows: m,
            cols: n,
            context: String::new(),
        });
    }
    if let Some(v) = design
        .values
        .iter()
        .chain(&design.targets)
        .find(|v| !v.is_finite())
    {
        return Err(Error::NonFinite(format!("design entry {v}")));
    }

    // Counts span ~1e4..1e10 across columns; normalise each to unit length.
    let scales: Vec<f64> = (0..n)
        .map(|j| {
            let norm = (0..m).map(|i| design.get(i, j).powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| design.get(i, j) / scales[j]);
    let target = DVector::from_column_slice(&design.targets);

    let qr = householder_qr(scaled.clone(), target.clone());
    let tol = qr.diag_max * (m.max(n) as f64) * f64::EPSILON;
    let rank = qr.diag().filter(|d| d.abs() > tol).count();

    let z = if rank == n {
        qr.solve()
    } else {
        let svd = scaled.svd(true, true);
        let sv_tol = svd.singular_values.max() * (m.max(n) as f64) * f64::EPSILON;
        let x = svd
            .solve(&target, sv_tol)
            .map_err(|e| Error::Degenerate(e.to_string()))?;
        x.iter().copied().collect()
    };

    let coefficients: Vec<f64> = z.iter().zip(&scales).map(|(z, s)| z / s).collect();
    if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
        return Err(Error::NonFinite(format!("fitted coefficient {c}")));
    }
    Ok(LeastSquaresSolution { coefficients, rank })
}

struct PivotedQr {
    /// Column-major working matrix; R sits in its upper triangle.
    r: DMatrix<f64>,
    /// Q^T b
    qtb: DVector<f64>,
    perm: Vec<usize>,
    diag_max: f64,
}

fn householder_qr(mut a: DMatrix<f64>, mut b: DVector<f64>) -> PivotedQr {
    let (m, n) = a.shape();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag_max: f64 = 0.0;

    for k in 0..n {
        // pivot on the largest remaining sub-column
        let norm2 = |a: &DMatrix<f64>, j: usize| (k..m).map(|i| a[(i, j)].powi(2)).sum::<f64>();
        let pivot = (k..n)
            .max_by(|&x, &y| norm2(&a, x).total_cmp(&norm2(&a, y)).then(y.cmp(&x)))
            .unwrap_or(k);
        if pivot != k {
            a.swap_columns(k, pivot);
            perm.swap(k, pivot);
        }

        let norm = norm2(&a, k).sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k + 1..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[(k + t, j)]).sum();
            let f = 2.0 * dot / vv;
            for (t, vt) in v.iter().enumerate() {
                a[(k + t, j)] -= f * vt;
            }
        }
        let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * b[k + t]).sum();
        let f = 2.0 * dot / vv;
        for (t, vt) in v.iter().enumerate() {
            b[k + t] -= f * vt;
        }
        a[(k, k)] = alpha;
        for i in k + 1..m {
            a[(i, k)] = 0.0;
        }
        diag_max = diag_max.max(alpha.abs());
    }
    PivotedQr {
        r: a,
        qtb: b,
        perm,
        diag_max,
    }
}

impl PivotedQr {
    fn diag(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.r.ncols()).map(|k| self.r[(k, k)])
    }

    /// Back substitution; only valid at full rank.
    fn solve(&self) -> Vec<f64> {
        let n = self.r.ncols();
        let mut z = vec![0.0; n];
        for k in (0..n).rev() {
            let tail: f64 = (k + 1..n).map(|j| self.r[(k, j)] * z[j]).sum();
            z[k] = (self.qtb[k] - tail) / self.r[(k, k)];
        }
        let mut x = vec![0.0; n];
        for (k, &col) in self.perm.iter().enumerate() {
            x[col] = z[k];
        }
        x
    }
}

/// Fitting switches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Add a constant term. Off by default since energies are net of idle.
    pub intercept: bool,
    /// Description stored in `trained_on`; derived from the dataset if `None`.
    pub trained_on: Option<String>,
}

fn describe(dataset: &Dataset) -> String {
    let groups: Vec<String> = dataset
        .groups()
        .iter()
        .map(|((codec, decoder), g)| format!("{codec}/{decoder}:{}", g.len()))
        .collect();
    format!("{} records [{}]", dataset.len(), groups.join(", "))
}

/// Least-squares specific energies for `features` over `dataset`.
pub fn fit_least_squares(dataset: &Dataset, features: &FeatureSet) -> Result<ModelCoefficients> {
    fit_with_options(dataset, features, &FitOptions::default())
}

pub fn fit_with_options(
    dataset: &Dataset,
    features: &FeatureSet,
    options: &FitOptions,
) -> Result<ModelCoefficients> {
    let design = build_design_matrix(dataset, features)?;
    let trained_on = options
        .trained_on
        .clone()
        .unwrap_or_else(|| describe(dataset));
    fit_design(&design, features, options.intercept, trained_on)
}

/// Fits an already-built design matrix whose columns follow `features`.
pub fn fit_design(
    design: &DesignMatrix,
    features: &FeatureSet,
    intercept: bool,
    trained_on: String,
) -> Result<ModelCoefficients> {
    if design.cols != features.len() {
        return Err(Error::Dimension(format!(
            "design has {} columns for {} predictors",
            design.cols,
            features.len()
        )));
    }
    let solution = if intercept {
        solve_least_squares(&design.with_ones_column())?
    } else {
        solve_least_squares(design)?
    };
    let unknowns = solution.coefficients.len();
    let mut warnings = Vec::new();
    if solution.rank < unknowns {
        warnings.push(format!(
            "rank-deficient design (rank {} of {unknowns}); minimum-norm solution returned",
            solution.rank
        ));
    }
    let mut coefficients = solution.coefficients;
    let constant = intercept.then(|| coefficients.pop().unwrap_or_default());
    for (p, c) in features.predictors().iter().zip(&coefficients) {
        if *c < 0.0 {
            warnings.push(format!(
                "negative coefficient for {p}: {c:e} {}",
                p.coefficient_unit()
            ));
        }
    }
    let model = ModelCoefficients::new(features.clone(), coefficients, trained_on, warnings)?;
    match constant {
        Some(c) => model.with_intercept(c),
        None => Ok(model),
    }
}

/// Estimated energy in joules: the dot product of the model's predictor
/// values and coefficients, plus the intercept if the model has one.
pub fn predict(model: &ModelCoefficients, input: &FeatureValues) -> Result<f64> {
    let mut energy = 0.0;
    for (p, c) in model.iter() {
        let value = input
            .get(p)
            .ok_or_else(|| Error::IncompleteInput(p.symbol().to_string()))?;
        energy += value * c;
    }
    if let Some(b) = model.intercept() {
        energy += b;
    }
    if !energy.is_finite() {
        return Err(Error::NonFinite(format!("predicted energy {energy}")));
    }
    Ok(energy)
}

pub fn predict_events(model: &ModelCoefficients, events: &EventVector) -> Result<f64> {
    predict(model, &FeatureValues::from_events(events))
}

pub fn predict_record(model: &ModelCoefficients, record: &MeasurementRecord) -> Result<f64> {
    predict(model, &FeatureValues::from_record(record))
}

/// Predictions for a design matrix built with the model's feature set.
pub fn predict_design(model: &ModelCoefficients, design: &DesignMatrix) -> Vec<f64> {
    (0..design.rows)
        .map(|i| {
            let dot: f64 = design
                .row(i)
                .iter()
                .zip(model.coefficients())
                .map(|(v, c)| v * c)
                .sum();
            dot + model.intercept().unwrap_or(0.0)
        })
        .collect()
}

/// Sum of squared training residuals of `model` on `dataset`.
pub fn residual_sum_of_squares(model: &ModelCoefficients, dataset: &Dataset) -> Result<f64> {
    let design = build_design_matrix(dataset, model.feature_set())?;
    Ok(predict_design(model, &design)
        .iter()
        .zip(design.targets())
        .map(|(p, e)| (p - e).powi(2))
        .sum())
}

/// Fits `features` on `dataset` and returns the training residual sum of
/// squares.
pub fn in_sample_residual(dataset: &Dataset, features: &FeatureSet) -> Result<f64> {
    let model = fit_least_squares(dataset, features)?;
    residual_sum_of_squares(&model, dataset)
}

/// `C * V^2 * instructions`, in joules.
pub fn capacitance_energy(model: &CapacitanceModel, instructions: u64) -> f64 {
    model.capacitance() * model.voltage() * model.voltage() * instructions as f64
}

/// Fits the instruction-only model and reads its coefficient as the implied
/// `C * V^2` product of the capacitance model.
pub fn capacitance_equivalence(dataset: &Dataset) -> Result<(ModelCoefficients, f64)> {
    let model = fit_least_squares(dataset, &FeatureSet::one_pe())?;
    let cv2 = model.coefficients()[0];
    Ok((model, cv2))
}
