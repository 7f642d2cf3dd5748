//! Text and JSON renderings of analysis results.

use std::fmt::Write;

use decode_energy::validation::{Cell, ComparisonTable, ModelColumn, SubsetSelection};
use decode_energy::{
    format_energy, AccessClass, CacheLevel, CorrelationReport, ErrorReport, FeatureSet, FoldPlan,
    ModelCoefficients,
};
use serde_json::{json, Map, Value};

use crate::Format;

/// Error as a percentage with two decimals, e.g. `11.78 %`.
pub fn percent(error: f64) -> String {
    format!("{:.2} %", error * 100.0)
}

fn json_text(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, Value::from)
}

pub fn correlation(report: &CorrelationReport, format: Format) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
    match format {
        Format::Json => {
            let mut map = Map::new();
            for (kind, r) in report.entries() {
                map.insert(kind.symbol().into(), opt(r));
            }
            map.insert("time".into(), opt(report.decode_time));
            json_text(Value::Object(map))
        }
        Format::Text => {
            let mut s = format!("{:<5}", "");
            for class in AccessClass::ALL {
                let _ = write!(s, "{:>9}", class.symbol());
            }
            s.push('\n');
            for (level, row) in CacheLevel::ALL.iter().zip(report.grid()) {
                let _ = write!(s, "{:<5}", level.suffix());
                for r in row {
                    let _ = write!(s, "{:>9}", cell(r));
                }
                s.push('\n');
            }
            let _ = writeln!(s, "{:<5}{:>9}", "time", cell(report.decode_time));
            s
        }
    }
}

pub fn coefficients(model: &ModelCoefficients) -> String {
    let mut s = String::new();
    for (p, c) in model.iter() {
        let unit = if p.symbol() == "time" {
            format!("{c} W")
        } else {
            format_energy(c)
        };
        let _ = writeln!(s, "{:<6}{unit}", p.symbol());
    }
    if let Some(b) = model.intercept() {
        let _ = writeln!(s, "{:<6}{}", "b", format_energy(b));
    }
    let _ = writeln!(s, "trained on {}", model.trained_on);
    s
}

pub fn crossval(
    features: &FeatureSet,
    plan: &FoldPlan,
    report: &ErrorReport,
    per_record: bool,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let mut value = json!({
                "features": features.to_string(),
                "k": plan.k(),
                "seed": plan.seed(),
                "n_records": report.n_records,
                "mean_relative_error": report.mean_relative_error,
            });
            if per_record {
                let errors: Map<String, Value> = report
                    .per_record
                    .iter()
                    .map(|(id, e)| (id.clone(), Value::from(*e)))
                    .collect();
                value["per_record"] = Value::Object(errors);
            }
            json_text(value)
        }
        Format::Text => {
            let mut s = format!(
                "features {features}\n{}-fold cross-validation, seed {}, {} records\nmean relative error {}\n",
                plan.k(),
                plan.seed(),
                report.n_records,
                percent(report.mean_relative_error)
            );
            if per_record {
                for (id, e) in &report.per_record {
                    let _ = writeln!(s, "{id}\t{}", percent(*e));
                }
            }
            s
        }
    }
}

pub fn selection(selection: &SubsetSelection, ranking: bool, format: Format) -> String {
    match format {
        Format::Json => {
            let mut value = json!({
                "best": selection.best.to_string(),
                "mean_relative_error": selection.report.mean_relative_error,
                "candidates": selection.ranking.len(),
            });
            if ranking {
                value["ranking"] = selection
                    .ranking
                    .iter()
                    .map(|r| json!({"features": r.features.to_string(), "mean_relative_error": r.report.mean_relative_error}))
                    .collect();
            }
            json_text(value)
        }
        Format::Text => {
            let mut s = format!(
                "best {} {}\n",
                selection.best,
                percent(selection.report.mean_relative_error)
            );
            if ranking {
                for (i, r) in selection.ranking.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{:>4}  {:<40}{:>10}",
                        i + 1,
                        r.features.to_string(),
                        percent(r.report.mean_relative_error)
                    );
                }
            }
            s
        }
    }
}

pub fn comparison(table: &ComparisonTable, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut cells = Map::new();
                    for (column, cell) in ModelColumn::ALL.iter().zip(&row.cells) {
                        cells.insert(column.label().into(), opt(cell.error()));
                    }
                    json!({"label": row.label, "n_records": row.n_records, "errors": cells})
                })
                .collect();
            json_text(json!({"k": table.k, "seed": table.seed, "rows": rows}))
        }
        Format::Text => {
            let width = table
                .rows
                .iter()
                .map(|r| r.label.len())
                .max()
                .unwrap_or(0)
                .max(5);
            let mut s = format!("{:<width$}{:>7}", "", "M");
            for column in ModelColumn::ALL {
                let _ = write!(s, "{:>10}", column.label());
            }
            s.push('\n');
            for row in &table.rows {
                let _ = write!(s, "{:<width$}{:>7}", row.label, row.n_records);
                for cell in &row.cells {
                    let text = match cell {
                        Cell::Available(r) => percent(r.mean_relative_error),
                        Cell::Unavailable(_) => "n/a".into(),
                    };
                    let _ = write!(s, "{text:>10}");
                }
                s.push('\n');
            }
            s
        }
    }
}
