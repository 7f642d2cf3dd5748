//! Core data types: processor event kinds, per-run event counts, measurement
//! records and the model/report types shared by the rest of the crate.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Kind of memory access counted by the profiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccessClass {
    Instruction,
    DataRead,
    DataWrite,
}

impl AccessClass {
    pub const ALL: [AccessClass; 3] = [
        AccessClass::Instruction,
        AccessClass::DataRead,
        AccessClass::DataWrite,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            AccessClass::Instruction => "I",
            AccessClass::DataRead => "R",
            AccessClass::DataWrite => "W",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AccessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Cache outcome qualifying an access count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CacheLevel {
    /// Every access, regardless of cache outcome.
    Reference,
    L1Miss,
    /// Miss in the last-level cache.
    LLMiss,
}

impl CacheLevel {
    pub const ALL: [CacheLevel; 3] = [
        CacheLevel::Reference,
        CacheLevel::L1Miss,
        CacheLevel::LLMiss,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            CacheLevel::Reference => "r",
            CacheLevel::L1Miss => "L1",
            CacheLevel::LLMiss => "LL",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Cache level at which hits can be derived from miss counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitLevel {
    L1,
    LL,
}

/// One of the nine processor events: an access class qualified by a cache
/// level. The derived ordering is the canonical one (I, R, W major; r, L1, LL
/// minor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKind {
    pub access_class: AccessClass,
    pub cache_level: CacheLevel,
}

impl EventKind {
    pub const I_R: EventKind = EventKind::new(AccessClass::Instruction, CacheLevel::Reference);
    pub const I_L1: EventKind = EventKind::new(AccessClass::Instruction, CacheLevel::L1Miss);
    pub const I_LL: EventKind = EventKind::new(AccessClass::Instruction, CacheLevel::LLMiss);
    pub const R_R: EventKind = EventKind::new(AccessClass::DataRead, CacheLevel::Reference);
    pub const R_L1: EventKind = EventKind::new(AccessClass::DataRead, CacheLevel::L1Miss);
    pub const R_LL: EventKind = EventKind::new(AccessClass::DataRead, CacheLevel::LLMiss);
    pub const W_R: EventKind = EventKind::new(AccessClass::DataWrite, CacheLevel::Reference);
    pub const W_L1: EventKind = EventKind::new(AccessClass::DataWrite, CacheLevel::L1Miss);
    pub const W_LL: EventKind = EventKind::new(AccessClass::DataWrite, CacheLevel::LLMiss);

    /// All nine kinds in canonical order.
    pub const ALL: [EventKind; 9] = [
        EventKind::I_R,
        EventKind::I_L1,
        EventKind::I_LL,
        EventKind::R_R,
        EventKind::R_L1,
        EventKind::R_LL,
        EventKind::W_R,
        EventKind::W_L1,
        EventKind::W_LL,
    ];

    pub const fn new(access_class: AccessClass, cache_level: CacheLevel) -> Self {
        EventKind {
            access_class,
            cache_level,
        }
    }

    /// Position in the canonical order, `0..9`.
    pub fn index(self) -> usize {
        self.access_class.index() * 3 + self.cache_level.index()
    }

    /// Short symbol such as `I_r` or `W_LL`.
    pub fn symbol(self) -> &'static str {
        const SYMBOLS: [&str; 9] = [
            "I_r", "I_L1", "I_LL", "R_r", "R_L1", "R_LL", "W_r", "W_L1", "W_LL",
        ];
        SYMBOLS[self.index()]
    }

    /// Column name used by cachegrind's `events:` header.
    pub fn cachegrind_name(self) -> &'static str {
        const NAMES: [&str; 9] = [
            "Ir", "I1mr", "ILmr", "Dr", "D1mr", "DLmr", "Dw", "D1mw", "DLmw",
        ];
        NAMES[self.index()]
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        EventKind::ALL.into_iter().find(|k| k.symbol() == s)
    }

    pub fn from_cachegrind_name(s: &str) -> Option<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.cachegrind_name() == s)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Program-total counts of the nine processor events for one run.
///
/// Construction enforces the cache hierarchy per access class:
/// `reference >= L1 misses >= LL misses`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EventVector {
    counts: [u64; 9],
}

impl EventVector {
    /// Builds a vector from counts given in canonical order.
    pub fn new(counts: [u64; 9]) -> Result<Self> {
        for class in AccessClass::ALL {
            let base = class.index() * 3;
            let (reference, l1_miss, ll_miss) = (counts[base], counts[base + 1], counts[base + 2]);
            if reference < l1_miss || l1_miss < ll_miss {
                return Err(Error::InvalidEventVector {
                    class,
                    reference,
                    l1_miss,
                    ll_miss,
                });
            }
        }
        Ok(EventVector { counts })
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EventKind, u64)>,
    {
        let mut counts = [0; 9];
        let mut seen = [false; 9];
        for (kind, count) in pairs {
            counts[kind.index()] = count;
            seen[kind.index()] = true;
        }
        if let Some(missing) = EventKind::ALL.iter().find(|k| !seen[k.index()]) {
            return Err(Error::IncompleteInput(missing.symbol().to_string()));
        }
        EventVector::new(counts)
    }

    pub fn get(&self, kind: EventKind) -> u64 {
        self.counts[kind.index()]
    }

    /// Counts in canonical order.
    pub fn counts(&self) -> &[u64; 9] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventKind, u64)> + '_ {
        EventKind::ALL.into_iter().map(|k| (k, self.get(k)))
    }

    /// Number of accesses of `class` that hit at `level`: references minus L1
    /// misses for `L1`, L1 misses minus LL misses for `LL`.
    pub fn derive_hits(&self, class: AccessClass, level: HitLevel) -> u64 {
        let get = |l: CacheLevel| self.get(EventKind::new(class, l));
        match level {
            HitLevel::L1 => get(CacheLevel::Reference) - get(CacheLevel::L1Miss),
            HitLevel::LL => get(CacheLevel::L1Miss) - get(CacheLevel::LLMiss),
        }
    }

    /// Instruction count used by the capacitance model.
    pub fn instruction_count(&self) -> u64 {
        self.get(EventKind::I_R)
    }
}

/// Same rule as [`EventVector::derive_hits`] applied to unvalidated counts.
pub fn derive_hits(counts: &[u64; 9], class: AccessClass, level: HitLevel) -> Result<u64> {
    Ok(EventVector::new(*counts)?.derive_hits(class, level))
}

/// One decoded bitstream: metadata, measured net energy, decoding time and
/// processor event counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub id: String,
    pub codec: String,
    pub decoder: String,
    /// Net processing energy in joules (idle offset removed).
    pub energy: f64,
    /// Decoding time in seconds.
    pub decode_time: f64,
    pub events: EventVector,
}

impl MeasurementRecord {
    pub fn new(
        id: impl Into<String>,
        codec: impl Into<String>,
        decoder: impl Into<String>,
        energy: f64,
        decode_time: f64,
        events: EventVector,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: &str| Error::InvalidRecord {
            id: id.clone(),
            reason: reason.to_string(),
        };
        if id.is_empty() {
            return Err(invalid("empty id"));
        }
        if !energy.is_finite() || energy < 0.0 {
            return Err(invalid("energy must be finite and non-negative"));
        }
        if !decode_time.is_finite() || decode_time < 0.0 {
            return Err(invalid("decode time must be finite and non-negative"));
        }
        Ok(MeasurementRecord {
            id,
            codec: codec.into(),
            decoder: decoder.into(),
            energy,
            decode_time,
            events,
        })
    }

    /// Value of one predictor for this record.
    pub fn feature(&self, predictor: Predictor) -> f64 {
        match predictor {
            Predictor::Event(kind) => self.events.get(kind) as f64,
            Predictor::DecodeTime => self.decode_time,
        }
    }

    pub fn feature_values(&self) -> FeatureValues {
        FeatureValues::from_record(self)
    }
}

/// Ordered collection of records with pairwise distinct ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<MeasurementRecord>,
}

impl Dataset {
    pub fn new(records: Vec<MeasurementRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<MeasurementRecord> {
        self.records
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    pub fn push(&mut self, record: MeasurementRecord) -> Result<()> {
        if self.records.iter().any(|r| r.id == record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        self.records.push(record);
        Ok(())
    }

    /// Concatenates two datasets, rejecting id collisions.
    pub fn concat(mut self, other: Dataset) -> Result<Self> {
        self.records.extend(other.records);
        Dataset::new(self.records)
    }

    /// Sub-dataset of the records at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    /// Splits by `(codec, decoder)`, groups ordered by first appearance.
    pub fn groups(&self) -> Vec<((String, String), Dataset)> {
        let mut groups: Vec<((String, String), Vec<usize>)> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let key = (r.codec.clone(), r.decoder.clone());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, idx)) => idx.push(i),
                None => groups.push((key, vec![i])),
            }
        }
        groups
            .into_iter()
            .map(|(k, idx)| (k, self.select(&idx)))
            .collect()
    }
}

/// A model input: one of the event counts, or the decoding time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predictor {
    Event(EventKind),
    DecodeTime,
}

impl Predictor {
    pub fn symbol(self) -> &'static str {
        match self {
            Predictor::Event(k) => k.symbol(),
            Predictor::DecodeTime => "time",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "time" => Some(Predictor::DecodeTime),
            _ => EventKind::from_symbol(s).map(Predictor::Event),
        }
    }

    /// Unit of the coefficient attached to this predictor.
    pub fn coefficient_unit(self) -> &'static str {
        match self {
            Predictor::Event(_) => "J/event",
            Predictor::DecodeTime => "J/s",
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Non-empty, duplicate-free set of predictors in canonical order. Event
/// kinds and the decoding time are rival models and never mix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureSet {
    predictors: Vec<Predictor>,
}

impl FeatureSet {
    pub fn new(predictors: impl IntoIterator<Item = Predictor>) -> Result<Self> {
        let mut predictors: Vec<Predictor> = predictors.into_iter().collect();
        if predictors.is_empty() {
            return Err(Error::InvalidFeatureSet("no predictors".into()));
        }
        predictors.sort();
        if let Some(w) = predictors.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidFeatureSet(format!(
                "duplicate predictor {}",
                w[0]
            )));
        }
        let has_time = predictors.contains(&Predictor::DecodeTime);
        if has_time && predictors.len() > 1 {
            return Err(Error::InvalidFeatureSet(
                "decode time cannot be combined with event counts".into(),
            ));
        }
        Ok(FeatureSet { predictors })
    }

    pub fn from_events(kinds: impl IntoIterator<Item = EventKind>) -> Result<Self> {
        FeatureSet::new(kinds.into_iter().map(Predictor::Event))
    }

    /// `{I_r}`: instruction count only.
    pub fn one_pe() -> Self {
        FeatureSet {
            predictors: vec![Predictor::Event(EventKind::I_R)],
        }
    }

    /// `{I_r, I_LL, W_r, W_LL}`: instructions, writes and their LL misses.
    pub fn four_pe() -> Self {
        FeatureSet {
            predictors: [
                EventKind::I_R,
                EventKind::I_LL,
                EventKind::W_R,
                EventKind::W_LL,
            ]
            .into_iter()
            .map(Predictor::Event)
            .collect(),
        }
    }

    pub fn nine_pe() -> Self {
        FeatureSet {
            predictors: EventKind::ALL.into_iter().map(Predictor::Event).collect(),
        }
    }

    pub fn decode_time() -> Self {
        FeatureSet {
            predictors: vec![Predictor::DecodeTime],
        }
    }

    /// Parses a preset name (`1pe`, `4pe`, `9pe`, `time`) or a comma-separated
    /// list of predictor symbols.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1pe" => Ok(FeatureSet::one_pe()),
            "4pe" => Ok(FeatureSet::four_pe()),
            "9pe" => Ok(FeatureSet::nine_pe()),
            "time" => Ok(FeatureSet::decode_time()),
            list => list
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    Predictor::from_symbol(tok).ok_or_else(|| {
                        Error::InvalidFeatureSet(format!("unknown predictor `{tok}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .and_then(FeatureSet::new),
        }
    }

    pub fn predictors(&self) -> &[Predictor] {
        &self.predictors
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictors.is_empty()
    }

    pub fn contains(&self, p: Predictor) -> bool {
        self.predictors.contains(&p)
    }

    pub fn is_decode_time(&self) -> bool {
        self.predictors == [Predictor::DecodeTime]
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.predictors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::parse(s)
    }
}

/// Sparse predictor values for a single prediction. Unlike [`EventVector`]
/// this may hold only the predictors a model needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureValues {
    values: BTreeMap<Predictor, f64>,
}

impl FeatureValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: &EventVector) -> Self {
        let mut values = FeatureValues::new();
        for (kind, count) in events.iter() {
            values.set(Predictor::Event(kind), count as f64);
        }
        values
    }

    pub fn from_record(record: &MeasurementRecord) -> Self {
        let mut values = FeatureValues::from_events(&record.events);
        values.set(Predictor::DecodeTime, record.decode_time);
        values
    }

    pub fn with(mut self, predictor: Predictor, value: f64) -> Self {
        self.set(predictor, value);
        self
    }

    pub fn set(&mut self, predictor: Predictor, value: f64) {
        self.values.insert(predictor, value);
    }

    pub fn get(&self, predictor: Predictor) -> Option<f64> {
        self.values.get(&predictor).copied()
    }
}

/// Trained specific energies, aligned with the feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCoefficients {
    feature_set: FeatureSet,
    coefficients: Vec<f64>,
    intercept: Option<f64>,
    pub trained_on: String,
    pub warnings: Vec<String>,
}

impl ModelCoefficients {
    pub fn new(
        feature_set: FeatureSet,
        coefficients: Vec<f64>,
        trained_on: impl Into<String>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        if coefficients.len() != feature_set.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} predictors",
                coefficients.len(),
                feature_set.len()
            )));
        }
        if let Some((p, c)) = feature_set
            .predictors()
            .iter()
            .zip(&coefficients)
            .find(|(_, c)| !c.is_finite())
        {
            return Err(Error::NonFinite(format!("coefficient for {p} is {c}")));
        }
        Ok(ModelCoefficients {
            feature_set,
            coefficients,
            intercept: None,
            trained_on: trained_on.into(),
            warnings,
        })
    }

    pub fn with_intercept(mut self, intercept: f64) -> Result<Self> {
        if !intercept.is_finite() {
            return Err(Error::NonFinite(format!("intercept is {intercept}")));
        }
        self.intercept = Some(intercept);
        Ok(self)
    }

    pub fn feature_set(&self) -> &FeatureSet {
        &self.feature_set
    }

    /// Coefficients in feature-set order (joules per occurrence, or joules per
    /// second for the decoding-time model).
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, predictor: Predictor) -> Option<f64> {
        self.feature_set
            .predictors()
            .iter()
            .position(|&p| p == predictor)
            .map(|i| self.coefficients[i])
    }

    pub fn intercept(&self) -> Option<f64> {
        self.intercept
    }

    pub fn iter(&self) -> impl Iterator<Item = (Predictor, f64)> + '_ {
        self.feature_set
            .predictors()
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
    }
}

/// Switching-capacitance model `E = C * V^2 * instructions`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitanceModel {
    capacitance: f64,
    voltage: f64,
}

impl CapacitanceModel {
    /// `capacitance` in farad, `voltage` in volt; both finite and positive.
    pub fn new(capacitance: f64, voltage: f64) -> Result<Self> {
        for (name, v) in [("capacitance", capacitance), ("voltage", voltage)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidCapacitance(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(CapacitanceModel {
            capacitance,
            voltage,
        })
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    pub fn voltage(&self) -> f64 {
        self.voltage
    }
}

/// Pearson coefficients between each predictor and the measured energy.
/// `None` marks an entry whose column had zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    entries: [Option<f64>; 9],
    pub decode_time: Option<f64>,
}

impl CorrelationReport {
    pub fn new(entries: [Option<f64>; 9], decode_time: Option<f64>) -> Self {
        let clamp = |v: Option<f64>| v.map(|x| x.clamp(-1.0, 1.0));
        CorrelationReport {
            entries: entries.map(clamp),
            decode_time: clamp(decode_time),
        }
    }

    pub fn get(&self, kind: EventKind) -> Option<f64> {
        self.entries[kind.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (EventKind, Option<f64>)> + '_ {
        EventKind::ALL.into_iter().map(|k| (k, self.get(k)))
    }

    /// Rows r / L1 / LL, columns I / R / W.
    pub fn grid(&self) -> [[Option<f64>; 3]; 3] {
        let mut grid = [[None; 3]; 3];
        for kind in EventKind::ALL {
            grid[kind.cache_level.index()][kind.access_class.index()] = self.get(kind);
        }
        grid
    }
}

/// Relative estimation errors for a set of records and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mean_relative_error: f64,
    pub per_record: Vec<(String, f64)>,
    pub n_records: usize,
}

impl ErrorReport {
    pub fn from_errors(per_record: Vec<(String, f64)>) -> Self {
        let n_records = per_record.len();
        let mean_relative_error = if n_records == 0 {
            0.0
        } else {
            per_record.iter().map(|(_, e)| e).sum::<f64>() / n_records as f64
        };
        ErrorReport {
            mean_relative_error,
            per_record,
            n_records,
        }
    }

    pub fn percent(&self) -> f64 {
        self.mean_relative_error * 100.0
    }
}

/// Formats a specific energy with the largest SI prefix that keeps the
/// mantissa at or above 0.1, e.g. `0.47 nJ`, `0.43 µJ`.
pub fn format_energy(joules: f64) -> String {
    const PREFIXES: [(f64, &str); 5] = [
        (1.0, "J"),
        (1e-3, "mJ"),
        (1e-6, "µJ"),
        (1e-9, "nJ"),
        (1e-12, "pJ"),
    ];
    if joules == 0.0 || !joules.is_finite() {
        return format!("{joules} J");
    }
    let mag = joules.abs();
    let (scale, unit) = PREFIXES
        .iter()
        .copied()
        .find(|(scale, _)| mag >= 0.1 * scale)
        .unwrap_or(PREFIXES[PREFIXES.len() - 1]);
    let scaled = joules / scale;
    let text = format!("{scaled:.4}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    format!("{text} {unit}")
}
