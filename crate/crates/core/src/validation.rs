//! Cross-validation, exhaustive feature-subset search and the per-group model
//! comparison table.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{Dataset, ErrorReport, EventKind, FeatureSet};
use crate::error::{Error, Result};
use crate::model::{build_design_matrix, fit_design, predict_design, DesignMatrix};
use crate::stats::relative_errors;

/// Default number of folds.
pub const DEFAULT_FOLDS: usize = 10;

/// Deterministic assignment of records to `k` folds.
///
/// Records are shuffled with a `ChaCha8Rng` seeded through
/// `SeedableRng::seed_from_u64(seed)` and dealt round-robin, so fold sizes
/// differ by at most one. The plan depends on the id order of the dataset it
/// was made from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    ids: Vec<String>,
    folds: Vec<usize>,
}

impl FoldPlan {
    /// Plan from an explicit assignment; `folds[i]` is the fold of `ids[i]`.
    pub fn from_assignment(
        k: usize,
        seed: u64,
        ids: Vec<String>,
        folds: Vec<usize>,
    ) -> Result<Self> {
        if ids.len() != folds.len() {
            return Err(Error::FoldPlanMismatch(format!(
                "{} ids for {} fold indices",
                ids.len(),
                folds.len()
            )));
        }
        if k < 2 || k > ids.len() {
            return Err(Error::FoldCount {
                k,
                records: ids.len(),
            });
        }
        if let Some(f) = folds.iter().find(|&&f| f >= k) {
            return Err(Error::FoldPlanMismatch(format!(
                "fold index {f} >= k = {k}"
            )));
        }
        Ok(FoldPlan {
            k,
            seed,
            ids,
            folds,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// `(id, fold)` pairs in dataset order.
    pub fn assignment(&self) -> impl Iterator<Item = (&str, usize)> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.folds.iter().copied())
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id).map(|p| self.folds[p])
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }

    /// Fold index of every dataset record, in dataset order.
    fn folds_for(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        if dataset.len() != self.ids.len() {
            return Err(Error::FoldPlanMismatch(format!(
                "plan covers {} records, dataset has {}",
                self.ids.len(),
                dataset.len()
            )));
        }
        let index: HashMap<&str, usize> = self.assignment().collect();
        dataset
            .records()
            .iter()
            .map(|r| {
                index.get(r.id.as_str()).copied().ok_or_else(|| {
                    Error::FoldPlanMismatch(format!("record `{}` is not in the plan", r.id))
                })
            })
            .collect()
    }
}

pub fn make_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let m = dataset.len();
    if k < 2 || k > m {
        return Err(Error::FoldCount { k, records: m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut folds = vec![0; m];
    for (position, &record) in order.iter().enumerate() {
        folds[record] = position % k;
    }
    let ids = dataset.records().iter().map(|r| r.id.clone()).collect();
    FoldPlan::from_assignment(k, seed, ids, folds)
}

/// K-fold cross-validated relative error of `features`.
///
/// Each fold is predicted by a model fitted on the other folds; the held-out
/// errors of all records are pooled into a single mean.
pub fn cross_validate(
    dataset: &Dataset,
    features: &FeatureSet,
    plan: &FoldPlan,
) -> Result<ErrorReport> {
    let folds = plan.folds_for(dataset)?;
    let design = build_design_matrix(dataset, features)?;
    cross_validate_design(dataset, &design, features, &folds, plan.k())
}

fn cross_validate_design(
    dataset: &Dataset,
    design: &DesignMatrix,
    features: &FeatureSet,
    folds: &[usize],
    k: usize,
) -> Result<ErrorReport> {
    let mut predictions = vec![0.0; dataset.len()];
    for fold in 0..k {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..dataset.len()).partition(|&i| folds[i] == fold);
        if test.is_empty() {
            continue;
        }
        if train.len() < features.len() {
            return Err(Error::Underdetermined {
                rows: train.len(),
                cols: features.len(),
                context: format!(" in fold {fold}"),
            });
        }
        let model = fit_design(&design.select_rows(&train), features, false, String::new())
            .map_err(|e| match e {
                Error::Underdetermined { rows, cols, .. } => Error::Underdetermined {
                    rows,
                    cols,
                    context: format!(" in fold {fold}"),
                },
                other => other,
            })?;
        let held_out = predict_design(&model, &design.select_rows(&test));
        for (i, p) in test.into_iter().zip(held_out) {
            predictions[i] = p;
        }
    }
    relative_errors(&dataset.ids(), &predictions, design.targets())
}

/// One evaluated candidate of a subset search.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSubset {
    pub features: FeatureSet,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSelection {
    pub best: FeatureSet,
    pub report: ErrorReport,
    /// Every candidate, ascending by error; ties keep lexicographic order.
    pub ranking: Vec<RankedSubset>,
}

/// All `size`-element subsets of the nine event kinds in lexicographic order
/// of their canonical indices.
pub fn event_subsets(size: usize) -> Vec<Vec<EventKind>> {
    fn extend(start: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<EventKind>>) {
        if current.len() == size {
            out.push(current.iter().map(|&i| EventKind::ALL[i]).collect());
            return;
        }
        for i in start..EventKind::ALL.len() {
            current.push(i);
            extend(i + 1, size, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if size <= EventKind::ALL.len() {
        extend(0, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// Exhaustively cross-validates every `size`-subset of the nine event kinds
/// on the same fold plan and returns the best one.
pub fn select_subset(dataset: &Dataset, size: usize, plan: &FoldPlan) -> Result<SubsetSelection> {
    if !(1..=EventKind::ALL.len()).contains(&size) {
        return Err(Error::InvalidFeatureSet(format!(
            "subset size {size} not in 1..=9"
        )));
    }
    let folds = plan.folds_for(dataset)?;
    let full = build_design_matrix(dataset, &FeatureSet::nine_pe())?;

    let mut ranking = event_subsets(size)
        .into_iter()
        .map(|kinds| {
            let columns: Vec<usize> = kinds.iter().map(|k| k.index()).collect();
            let features = FeatureSet::from_events(kinds)?;
            let design = full.select_cols(&columns);
            let report = cross_validate_design(dataset, &design, &features, &folds, plan.k())?;
            Ok(RankedSubset { features, report })
        })
        .collect::<Result<Vec<_>>>()?;
    ranking.sort_by(|a, b| {
        a.report
            .mean_relative_error
            .total_cmp(&b.report.mean_relative_error)
    });
    let winner = &ranking[0];
    Ok(SubsetSelection {
        best: winner.features.clone(),
        report: winner.report.clone(),
        ranking,
    })
}

/// Model variants compared per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelColumn {
    OnePe,
    FourPe,
    NinePe,
    DecodeTime,
}

impl ModelColumn {
    pub const ALL: [ModelColumn; 4] = [
        ModelColumn::OnePe,
        ModelColumn::FourPe,
        ModelColumn::NinePe,
        ModelColumn::DecodeTime,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelColumn::OnePe => "1 PE",
            ModelColumn::FourPe => "4 PE",
            ModelColumn::NinePe => "9 PE",
            ModelColumn::DecodeTime => "time",
        }
    }

    pub fn features(self) -> FeatureSet {
        match self {
            ModelColumn::OnePe => FeatureSet::one_pe(),
            ModelColumn::FourPe => FeatureSet::four_pe(),
            ModelColumn::NinePe => FeatureSet::nine_pe(),
            ModelColumn::DecodeTime => FeatureSet::decode_time(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Available(ErrorReport),
    Unavailable(String),
}

impl Cell {
    pub fn error(&self) -> Option<f64> {
        match self {
            Cell::Available(r) => Some(r.mean_relative_error),
            Cell::Unavailable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// `codec/decoder`, or `All` for the pooled row.
    pub label: String,
    pub n_records: usize,
    /// One cell per [`ModelColumn::ALL`] entry.
    pub cells: Vec<Cell>,
}

impl ComparisonRow {
    pub fn cell(&self, column: ModelColumn) -> &Cell {
        let i = ModelColumn::ALL
            .iter()
            .position(|&c| c == column)
            .unwrap_or(0);
        &self.cells[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub k: usize,
    pub seed: u64,
    /// Per-group rows followed by the pooled `All` row.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn pooled(&self) -> &ComparisonRow {
        &self.rows[self.rows.len() - 1]
    }

    pub fn groups(&self) -> &[ComparisonRow] {
        &self.rows[..self.rows.len() - 1]
    }
}

fn compare_row(label: String, dataset: &Dataset, k: usize, seed: u64) -> ComparisonRow {
    let plan = if dataset.len() < 2 {
        Err(format!(
            "{} record(s); cross-validation needs at least 2",
            dataset.len()
        ))
    } else {
        make_folds(dataset, k.min(dataset.len()), seed).map_err(|e| e.to_string())
    };
    let cells = ModelColumn::ALL
        .iter()
        .map(|column| match &plan {
            Err(reason) => Cell::Unavailable(reason.clone()),
            Ok(plan) => match cross_validate(dataset, &column.features(), plan) {
                Ok(report) => Cell::Available(report),
                Err(e) => Cell::Unavailable(e.to_string()),
            },
        })
        .collect();
    ComparisonRow {
        label,
        n_records: dataset.len(),
        cells,
    }
}

/// Cross-validated errors of the 1-PE, 4-PE, 9-PE and decoding-time models
/// for every `(codec, decoder)` group, each trained on that group only, plus
/// a pooled `All` row trained without regard to codec or decoder.
///
/// Groups smaller than `k` use leave-one-out; cells that cannot be fitted are
/// marked unavailable.
pub fn compare_models(dataset: &Dataset, k: usize, seed: u64) -> Result<ComparisonTable> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k < 2 {
        return Err(Error::FoldCount {
            k,
            records: dataset.len(),
        });
    }
    let mut rows: Vec<ComparisonRow> = dataset
        .groups()
        .into_iter()
        .map(|((codec, decoder), group)| compare_row(format!("{codec}/{decoder}"), &group, k, seed))
        .collect();
    rows.push(compare_row("All".into(), dataset, k, seed));
    Ok(ComparisonTable { k, seed, rows })
}
