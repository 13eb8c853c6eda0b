//! Loading and shaping observation series: earthquake catalogs, tsunami heights,
//! rainfall totals and price histories.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveDateTime};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamped finite values, kept sorted by time (stable for equal timestamps).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    records: Vec<(NaiveDateTime, f64)>,
    units: String,
}

impl ObservationSeries {
    pub fn new(mut records: Vec<(NaiveDateTime, f64)>, units: impl Into<String>) -> Result<Self> {
        if let Some((t, v)) = records.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value {v} at {t}")));
        }
        records.sort_by_key(|r| r.0);
        Ok(Self { records, units: units.into() })
    }

    pub fn records(&self) -> &[(NaiveDateTime, f64)] {
        &self.records
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.1).collect()
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_time(&self) -> Option<NaiveDateTime> {
        self.records.first().map(|r| r.0)
    }

    pub fn last_time(&self) -> Option<NaiveDateTime> {
        self.records.last().map(|r| r.0)
    }

    fn with_records(&self, records: Vec<(NaiveDateTime, f64)>) -> Self {
        Self { records, units: self.units.clone() }
    }

    /// Applies `f` to every value, relabelling the units.
    pub fn map_values(&self, units: &str, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.records.iter().map(|&(t, v)| (t, f(v))).collect(), units)
    }
}

/// Moment magnitude to radiated energy in Joules: `10^(1.5 (mw + 3.2))`.
pub fn magnitude_to_energy(mw: f64) -> f64 {
    10f64.powf(1.5 * (mw + 3.2))
}

/// Inverse of [`magnitude_to_energy`]: `(2/3) log10(E) - 3.2`.
pub fn energy_to_magnitude(joules: f64) -> f64 {
    joules.log10() / 1.5 - 3.2
}

/// Gutenberg-Richter exponents: `b_value` for magnitudes, `big_b = (2/3) b` for energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GRParameters {
    pub b_value: f64,
    pub big_b: f64,
}

/// The energy exponent is the tail index `1 / eta`; `b = 1.5 B`.
pub fn eta_to_gr(eta: f64) -> Result<GRParameters> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("scaling exponent must be > 0, got {eta}")));
    }
    let big_b = 1.0 / eta;
    Ok(GRParameters { b_value: 1.5 * big_b, big_b })
}

/// Daily log losses `max(-log(p_t / p_{t-1}), 0)` with zero losses removed.
/// Each loss is stamped with the later price's time.
pub fn prices_to_losses(prices: &ObservationSeries) -> Result<ObservationSeries> {
    if prices.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 prices".into()));
    }
    if let Some((t, p)) = prices.records.iter().find(|(_, p)| !(*p > 0.0)) {
        return Err(Error::InvalidInput(format!("nonpositive price {p} at {t}")));
    }
    let losses = prices
        .records
        .windows(2)
        .filter_map(|w| {
            let loss = -(w[1].1 / w[0].1).ln();
            (loss > 0.0).then_some((w[1].0, loss))
        })
        .collect();
    ObservationSeries::new(losses, "log-loss")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Period {
    Year,
    Decade,
    Month,
}

impl Period {
    /// Sortable key and display label of the period containing `t`.
    fn key(&self, t: &NaiveDateTime) -> ((i32, u32), String) {
        match self {
            Period::Year => ((t.year(), 0), format!("{}", t.year())),
            Period::Decade => {
                let d = t.year().div_euclid(10) * 10;
                ((d, 0), format!("{d}s"))
            }
            Period::Month => ((t.year(), t.month()), format!("{}-{:02}", t.year(), t.month())),
        }
    }
}

/// Partitions the series by calendar period; decades are `[1960, 1970)` style bins.
/// Periods with no records do not appear.
pub fn aggregate_periods(series: &ObservationSeries, period: Period) -> Vec<(String, ObservationSeries)> {
    let mut groups: BTreeMap<(i32, u32), (String, Vec<(NaiveDateTime, f64)>)> = BTreeMap::new();
    for rec in &series.records {
        let (key, label) = period.key(&rec.0);
        groups.entry(key).or_insert_with(|| (label, Vec::new())).1.push(*rec);
    }
    groups
        .into_values()
        .map(|(label, recs)| (label, series.with_records(recs)))
        .collect()
}

/// Block size for one aggregation group: `ceil((1 - 1/e) * count)`.
pub fn aggregation_block_size(count: usize) -> usize {
    ((1.0 - (-1.0f64).exp()) * count as f64).ceil() as usize
}

/// Calendar-day windows `[start, start + window_days)` with starts at the first record's
/// date plus multiples of `step_days`. Only windows that fit entirely before the last
/// record's date are produced, and empty ones are omitted. Each window is labelled by its
/// last day.
pub fn rolling_windows(
    series: &ObservationSeries,
    window_days: u32,
    step_days: u32,
) -> Result<Vec<(NaiveDate, ObservationSeries)>> {
    if step_days == 0 || window_days < step_days {
        return Err(Error::Config(format!(
            "need window >= step >= 1, got window {window_days}, step {step_days}"
        )));
    }
    let (Some(first), Some(last)) = (series.first_time(), series.last_time()) else {
        return Ok(Vec::new());
    };
    let (first, last) = (first.date(), last.date());
    let mut out = Vec::new();
    let mut start = first;
    loop {
        let end_incl = start + Duration::days(window_days as i64 - 1);
        if end_incl > last {
            break;
        }
        let recs: Vec<_> = series
            .records
            .iter()
            .filter(|(t, _)| t.date() >= start && t.date() <= end_incl)
            .copied()
            .collect();
        if !recs.is_empty() {
            out.push((end_incl, series.with_records(recs)));
        }
        start += Duration::days(step_days as i64);
    }
    Ok(out)
}

/// Built-in column layouts for the supported catalogs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaKind {
    /// Magnitudes in `mag`, converted to Joules on load.
    Earthquake,
    /// Maximum water height in meters.
    Tsunami,
    /// Monthly precipitation totals; zero months are dropped.
    Rainfall,
    /// Closing prices.
    Financial,
    Generic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogSchema {
    pub kind: SchemaKind,
    pub time_col: String,
    pub value_col: String,
    /// chrono format string; `None` accepts common ISO-8601 forms.
    pub time_format: Option<String>,
    pub drop_zero: bool,
}

impl CatalogSchema {
    pub fn preset(kind: SchemaKind) -> Self {
        let (time_col, value_col, drop_zero) = match kind {
            SchemaKind::Earthquake => ("time", "mag", false),
            SchemaKind::Tsunami => ("date", "max_water_height", false),
            SchemaKind::Rainfall => ("date", "precipitation", true),
            SchemaKind::Financial => ("date", "close", false),
            SchemaKind::Generic => ("time", "value", false),
        };
        Self {
            kind,
            time_col: time_col.into(),
            value_col: value_col.into(),
            time_format: None,
            drop_zero,
        }
    }

    pub fn units(&self) -> &'static str {
        match self.kind {
            SchemaKind::Earthquake => "J",
            SchemaKind::Tsunami => "m",
            SchemaKind::Rainfall => "mm",
            SchemaKind::Financial => "price",
            SchemaKind::Generic => "",
        }
    }

    fn convert(&self, raw: f64) -> f64 {
        match self.kind {
            SchemaKind::Earthquake => magnitude_to_energy(raw),
            _ => raw,
        }
    }
}

/// Parses ISO-8601 style stamps (`2011-03-11T05:46:24.120Z`, `2011-03-11 05:46:24`,
/// `2011-03-11`, `2011-03`, `2011`) or, with `format`, that exact chrono pattern.
pub fn parse_timestamp(text: &str, format: Option<&str>) -> Option<NaiveDateTime> {
    let text = text.trim();
    if let Some(f) = format {
        return NaiveDateTime::parse_from_str(text, f)
            .ok()
            .or_else(|| NaiveDate::parse_from_str(text, f).ok().and_then(|d| d.and_hms_opt(0, 0, 0)));
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.naive_utc());
    }
    for f in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, f) {
            return Some(t);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    if let Ok(d) = NaiveDate::parse_from_str(&format!("{text}-01"), "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    let year: i32 = text.parse().ok()?;
    NaiveDate::from_ymd_opt(year, 1, 1)?.and_hms_opt(0, 0, 0)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
        Error::Schema(format!(
            "column '{name}' not found; available: {}",
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })
}

/// Reads a headered CSV into a series. Rows with an empty value cell (and, for
/// schemas that ask for it, zero values) are dropped; anything else unparsable is an
/// error naming the file line.
pub fn read_catalog<R: Read>(reader: R, schema: &CatalogSchema) -> Result<ObservationSeries> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ti = column(&headers, &schema.time_col)?;
    let vi = column(&headers, &schema.value_col)?;
    let mut records = Vec::new();
    let (mut missing, mut zeros) = (0usize, 0usize);
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse { row: line, message: e.to_string() })?;
        let raw_value = row.get(vi).map(str::trim).unwrap_or("");
        if raw_value.is_empty() {
            missing += 1;
            continue;
        }
        let value: f64 = raw_value.parse().map_err(|_| Error::Parse {
            row: line,
            message: format!("'{raw_value}' in column '{}' is not a number", schema.value_col),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse { row: line, message: format!("non-finite value '{raw_value}'") });
        }
        if schema.drop_zero && value == 0.0 {
            zeros += 1;
            continue;
        }
        let raw_time = row.get(ti).unwrap_or("");
        let time = parse_timestamp(raw_time, schema.time_format.as_deref()).ok_or_else(|| Error::Parse {
            row: line,
            message: format!("cannot parse timestamp '{raw_time}'"),
        })?;
        records.push((time, schema.convert(value)));
    }
    if missing > 0 {
        warn!("dropped {missing} rows with an empty '{}' cell", schema.value_col);
    }
    if zeros > 0 {
        info!("dropped {zeros} zero-valued rows");
    }
    ObservationSeries::new(records, schema.units())
}

pub fn load_catalog_csv(path: &Path, schema: &CatalogSchema) -> Result<ObservationSeries> {
    read_catalog(std::fs::File::open(path)?, schema)
}

/// Values of one column, for inputs without timestamps. Empty cells are skipped.
pub fn load_values_csv(path: &Path, value_col: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let vi = column(&rdr.headers()?.clone(), value_col)?;
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse { row: i + 2, message: e.to_string() })?;
        let cell = row.get(vi).map(str::trim).unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            row: i + 2,
            message: format!("'{cell}' is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { row: i + 2, message: format!("non-finite value '{cell}'") });
        }
        out.push(v);
    }
    Ok(out)
}
