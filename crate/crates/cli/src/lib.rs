//! The `decode-energy` command line: dataset and model persistence, and
//! text or JSON reports for each analysis step.

pub mod dataset_file;
pub mod error;
pub mod model_file;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use decode_energy::validation::DEFAULT_FOLDS;
use decode_energy::{
    compare_models, correlation_report, cross_validate, fit_least_squares, format_energy, generate,
    make_folds, predict, read_profile, select_subset, Dataset, EventKind, FeatureSet,
    FeatureValues, GeneratorSpec, MeasurementRecord, Predictor,
};

pub use dataset_file::{read_dataset, write_dataset};
pub use error::CliError;
pub use model_file::{read_model, write_model};

#[derive(Debug, Parser)]
#[command(
    name = "decode-energy",
    version,
    about = "Estimate decoding energy from processor event counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Folds {
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub k: usize,
    /// Seed of the fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append one measurement to a dataset, taking event totals from a cachegrind profile.
    Ingest {
        profile: PathBuf,
        /// Dataset CSV; created with a header if missing.
        #[arg(long)]
        dataset: PathBuf,
        /// Net decoding energy in joules.
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        /// Decoding time in seconds.
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
        /// Record id; defaults to the profile file stem.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        codec: String,
        #[arg(long)]
        decoder: String,
    },
    /// Correlation of every event count and the decoding time with energy.
    Correlate {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Fit specific energies by least squares.
    Fit {
        dataset: PathBuf,
        /// Preset (1pe, 4pe, 9pe, time) or comma-separated predictors.
        #[arg(long, default_value = "4pe")]
        features: String,
        /// Model file to write; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated mean relative error of a feature set.
    Crossval {
        dataset: PathBuf,
        #[arg(long, default_value = "4pe")]
        features: String,
        #[command(flatten)]
        folds: Folds,
        /// Also list the error of every record.
        #[arg(long)]
        per_record: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustive search for the event subset of a given size with the lowest error.
    Select {
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[command(flatten)]
        folds: Folds,
        /// Print every candidate, ascending by error.
        #[arg(long)]
        ranking: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Estimate the energy of one decoding run.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Cachegrind profile supplying the event counts.
        #[arg(long, conflicts_with = "counts")]
        profile: Option<PathBuf>,
        /// Counts in model feature order (`1e10,1e6`) or as `name=value` pairs.
        #[arg(long)]
        counts: Option<String>,
        /// Decoding time in seconds, for time-based models.
        #[arg(long)]
        time: Option<f64>,
    },
    /// Per codec/decoder errors of the 1-PE, 4-PE, 9-PE and time models.
    Compare {
        dataset: PathBuf,
        #[command(flatten)]
        folds: Folds,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write a synthetic dataset with known specific energies.
    Generate {
        #[arg(long, default_value = "paper4")]
        preset: String,
        #[arg(long, default_value_t = 100)]
        records: usize,
        /// Standard deviation of the log-normal energy noise.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        codec: Option<String>,
        #[arg(long)]
        decoder: Option<String>,
        /// Override coefficients, e.g. `I_r=0.47e-9,W_LL=0.16e-6`.
        #[arg(long)]
        coefficients: Option<String>,
        /// Append to an existing dataset instead of replacing it.
        #[arg(long, requires = "out")]
        append: bool,
        /// Dataset CSV to write; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn features(spec: &str) -> Result<FeatureSet, CliError> {
    Ok(FeatureSet::parse(spec)?)
}

fn non_empty(path: &Path) -> Result<Dataset, CliError> {
    let d = read_dataset(path)?;
    if d.is_empty() {
        return Err(CliError::Input(format!(
            "{}: dataset has no records",
            path.display()
        )));
    }
    Ok(d)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest {
            profile,
            dataset,
            energy,
            time,
            id,
            codec,
            decoder,
        } => {
            if !energy.is_finite() || energy <= 0.0 {
                return Err(CliError::Validation("energy must be positive".into()));
            }
            if !time.is_finite() || time < 0.0 {
                return Err(CliError::Validation("time must be non-negative".into()));
            }
            let events = read_profile(&profile)
                .map_err(|e| CliError::Input(format!("{}: {e}", profile.display())))?
                .to_event_vector()
                .map_err(|e| CliError::from(e).context(profile.display()))?;
            let id = id.unwrap_or_else(|| {
                profile
                    .file_stem()
                    .map_or_else(|| "record".into(), |s| s.to_string_lossy().into_owned())
            });
            let mut d = if dataset.exists() {
                read_dataset(&dataset)?
            } else {
                Dataset::default()
            };
            d.push(MeasurementRecord::new(
                id.clone(),
                codec,
                decoder,
                energy,
                time,
                events,
            )?)?;
            write_dataset(&d, &dataset)?;
            emit(out, &format!("appended `{id}` ({} records)\n", d.len()))
        }
        Command::Correlate { dataset, format } => {
            let report = correlation_report(&non_empty(&dataset)?)?;
            emit(out, &report::correlation(&report, format))
        }
        Command::Fit {
            dataset,
            features: spec,
            out: path,
        } => {
            let model = fit_least_squares(&non_empty(&dataset)?, &features(&spec)?)?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            match path {
                Some(path) => {
                    write_model(&model, &path)?;
                    emit(out, &report::coefficients(&model))
                }
                None => emit(out, &model_file::model_to_string(&model)),
            }
        }
        Command::Crossval {
            dataset,
            features: spec,
            folds,
            per_record,
            format,
        } => {
            let d = non_empty(&dataset)?;
            let fs = features(&spec)?;
            let plan = make_folds(&d, folds.k, folds.seed)?;
            let r = cross_validate(&d, &fs, &plan)?;
            emit(out, &report::crossval(&fs, &plan, &r, per_record, format))
        }
        Command::Select {
            dataset,
            size,
            folds,
            ranking,
            format,
        } => {
            let d = non_empty(&dataset)?;
            let plan = make_folds(&d, folds.k, folds.seed)?;
            let selection = select_subset(&d, size, &plan)?;
            emit(out, &report::selection(&selection, ranking, format))
        }
        Command::Predict {
            model,
            profile,
            counts,
            time,
        } => {
            let model = read_model(&model)?;
            let mut input = match (profile, counts) {
                (Some(p), _) => {
                    let events = read_profile(&p)
                        .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
                        .to_event_vector()
                        .map_err(|e| CliError::from(e).context(p.display()))?;
                    FeatureValues::from_events(&events)
                }
                (None, Some(c)) => parse_counts(&c, model.feature_set())?,
                (None, None) => FeatureValues::new(),
            };
            if let Some(t) = time {
                input.set(Predictor::DecodeTime, t);
            }
            let energy = predict(&model, &input)?;
            emit(out, &format!("{}\n", format_energy(energy)))
        }
        Command::Compare {
            dataset,
            folds,
            format,
        } => {
            let table = compare_models(&non_empty(&dataset)?, folds.k, folds.seed)?;
            emit(out, &report::comparison(&table, format))
        }
        Command::Generate {
            preset,
            records,
            noise,
            seed,
            codec,
            decoder,
            coefficients,
            append,
            out: path,
        } => {
            let mut spec = match preset.as_str() {
                "paper4" => GeneratorSpec::paper4(),
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown preset `{other}` (known: paper4)"
                    )))
                }
            };
            spec.n_records = records;
            spec.noise_sigma = noise;
            spec.seed = seed;
            if let Some(c) = codec {
                spec.codec = c;
            }
            if let Some(d) = decoder {
                spec.decoder = d;
            }
            if let Some(c) = coefficients {
                spec = spec.with_coefficients(parse_coefficients(&c)?);
            }
            let generated = generate(&spec)?;
            match path {
                Some(path) => {
                    let d = if append && path.exists() {
                        read_dataset(&path)?.concat(generated)?
                    } else {
                        generated
                    };
                    write_dataset(&d, &path)?;
                    emit(
                        out,
                        &format!("wrote {} records to {}\n", d.len(), path.display()),
                    )
                }
                None => emit(out, &dataset_file::dataset_to_string(&generated)),
            }
        }
    }
}

fn parse_number(token: &str) -> Result<f64, CliError> {
    token
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Input(format!("`{token}` is not a number")))
}

/// Counts either positional in the model's feature order or as
/// `symbol=value` pairs naming event kinds or `time`.
fn parse_counts(text: &str, features: &FeatureSet) -> Result<FeatureValues, CliError> {
    let tokens: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    let mut values = FeatureValues::new();
    if tokens.iter().all(|t| t.contains('=')) && !tokens.is_empty() {
        for t in tokens {
            let (name, value) = t.split_once('=').expect("checked above");
            let p = Predictor::from_symbol(name.trim())
                .ok_or_else(|| CliError::Input(format!("unknown predictor `{name}`")))?;
            values.set(p, parse_number(value)?);
        }
        return Ok(values);
    }
    if tokens.len() != features.len() {
        return Err(CliError::Modeling(format!(
            "{} counts given for model features {features}",
            tokens.len()
        )));
    }
    for (p, t) in features.predictors().iter().zip(tokens) {
        values.set(*p, parse_number(t)?);
    }
    Ok(values)
}

fn parse_coefficients(text: &str) -> Result<Vec<(EventKind, f64)>, CliError> {
    text.split(',')
        .map(|pair| {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("expected `event=joules`, got `{pair}`")))?;
            let kind = EventKind::from_symbol(name.trim())
                .ok_or_else(|| CliError::Input(format!("unknown event `{name}`")))?;
            Ok((kind, parse_number(value)?))
        })
        .collect()
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
