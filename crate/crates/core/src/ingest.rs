//! Hourly meter readings: CSV parsing, the per-meter series type and coverage
//! validation ahead of pattern extraction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Read, Write};

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use thiserror::Error;

use crate::calendar::{classify_day, DayContext, HolidayCalendar, SeasonConfig};

/// Expected CSV header of a readings file.
pub const READINGS_HEADER: [&str; 3] = ["meter_id", "timestamp", "kwh"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("readings header must be `meter_id,timestamp,kwh`, found `{0}`")]
    BadHeader(String),
    #[error("readings input is empty (no header)")]
    MissingHeader,
    #[error("I/O error reading readings: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("negative reading {0}")]
    Negative(f64),
    #[error("non-finite reading")]
    NonFinite,
    #[error("duplicate timestamp {0}")]
    Duplicate(HourStamp),
    #[error("hour {0} outside 0..=23")]
    BadHour(u8),
}

/// A civil date plus hour of day, the key of every reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HourStamp {
    date: NaiveDate,
    hour: u8,
}

impl HourStamp {
    pub fn new(date: NaiveDate, hour: u8) -> Result<Self, SeriesError> {
        if hour > 23 {
            return Err(SeriesError::BadHour(hour));
        }
        Ok(HourStamp { date, hour })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn hour(&self) -> u8 {
        self.hour
    }

    /// Parses `YYYY-MM-DDTHH:MM[:SS]` or `YYYY-MM-DDTHH`; minutes and seconds
    /// must be zero.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let dt = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M")
            .or_else(|_| NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S"))
            .or_else(|_| NaiveDateTime::parse_from_str(&format!("{text}:00"), "%Y-%m-%dT%H:%M"))
            .ok()?;
        if dt.minute() != 0 || dt.second() != 0 {
            return None;
        }
        Some(HourStamp {
            date: dt.date(),
            hour: dt.hour() as u8,
        })
    }
}

impl fmt::Display for HourStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}T{:02}:00", self.date.format("%Y-%m-%d"), self.hour)
    }
}

/// One meter's hourly readings in kWh, keyed and ordered by timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsumptionSeries {
    meter_id: String,
    readings: BTreeMap<HourStamp, f64>,
}

impl ConsumptionSeries {
    pub fn new(meter_id: impl Into<String>) -> Self {
        ConsumptionSeries {
            meter_id: meter_id.into(),
            readings: BTreeMap::new(),
        }
    }

    pub fn from_readings(
        meter_id: impl Into<String>,
        readings: impl IntoIterator<Item = (HourStamp, f64)>,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::new(meter_id);
        for (t, v) in readings {
            s.insert(t, v)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, stamp: HourStamp, kwh: f64) -> Result<(), SeriesError> {
        if !kwh.is_finite() {
            return Err(SeriesError::NonFinite);
        }
        if kwh < 0.0 {
            return Err(SeriesError::Negative(kwh));
        }
        if self.readings.contains_key(&stamp) {
            return Err(SeriesError::Duplicate(stamp));
        }
        self.readings.insert(stamp, kwh);
        Ok(())
    }

    pub fn meter_id(&self) -> &str {
        &self.meter_id
    }

    pub fn readings(&self) -> &BTreeMap<HourStamp, f64> {
        &self.readings
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    /// Copy with every reading multiplied by `factor` (which must be ≥ 0).
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor >= 0.0 && factor.is_finite());
        ConsumptionSeries {
            meter_id: self.meter_id.clone(),
            readings: self
                .readings
                .iter()
                .map(|(t, v)| (*t, v * factor))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagnosticKind {
    Malformed(String),
    NegativeReading,
    NonFiniteReading,
    DuplicateTimestamp,
}

/// A skipped row, with its 1-based line number in the input.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseDiagnostic {
    pub line: u64,
    pub kind: DiagnosticKind,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiagnosticKind::Malformed(why) => {
                write!(f, "line {}: malformed row ({why})", self.line)
            }
            DiagnosticKind::NegativeReading => write!(f, "line {}: negative reading", self.line),
            DiagnosticKind::NonFiniteReading => write!(f, "line {}: non-finite reading", self.line),
            DiagnosticKind::DuplicateTimestamp => {
                write!(f, "line {}: duplicate timestamp, keeping first", self.line)
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParsedReadings {
    /// One series per meter, ordered by meter id.
    pub series: Vec<ConsumptionSeries>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

/// Parses a `meter_id,timestamp,kwh` CSV stream. Bad rows are skipped with a
/// diagnostic; only a bad header or an I/O failure aborts.
pub fn parse_readings<R: Read>(reader: R) -> Result<ParsedReadings, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_fatal(e)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(IngestError::MissingHeader);
    }
    if headers.iter().collect::<Vec<_>>() != READINGS_HEADER {
        return Err(IngestError::BadHeader(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut meters: BTreeMap<String, ConsumptionSeries> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(csv_fatal(e));
                }
                diagnostics.push(ParseDiagnostic {
                    line,
                    kind: DiagnosticKind::Malformed(e.to_string()),
                });
                continue;
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(line);
        let malformed = |why: &str| ParseDiagnostic {
            line,
            kind: DiagnosticKind::Malformed(why.to_string()),
        };
        if record.len() != 3 {
            diagnostics.push(malformed(&format!(
                "expected 3 fields, found {}",
                record.len()
            )));
            continue;
        }
        let meter = &record[0];
        if meter.is_empty() {
            diagnostics.push(malformed("empty meter_id"));
            continue;
        }
        let Some(stamp) = HourStamp::parse(&record[1]) else {
            diagnostics.push(malformed("bad timestamp"));
            continue;
        };
        let Ok(kwh) = record[2].parse::<f64>() else {
            diagnostics.push(malformed("bad kwh value"));
            continue;
        };
        let series = meters
            .entry(meter.to_string())
            .or_insert_with(|| ConsumptionSeries::new(meter));
        if let Err(e) = series.insert(stamp, kwh) {
            let kind = match e {
                SeriesError::Negative(_) => DiagnosticKind::NegativeReading,
                SeriesError::NonFinite => DiagnosticKind::NonFiniteReading,
                SeriesError::Duplicate(_) => DiagnosticKind::DuplicateTimestamp,
                SeriesError::BadHour(_) => DiagnosticKind::Malformed("bad hour".into()),
            };
            diagnostics.push(ParseDiagnostic { line, kind });
        }
    }
    // Meters whose every row was rejected never got a reading.
    let series = meters.into_values().filter(|s| !s.is_empty()).collect();
    Ok(ParsedReadings {
        series,
        diagnostics,
    })
}

fn csv_fatal(e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::BadHeader(format!("{other:?}")),
    }
}

/// Writes series back out in the readings CSV format, meters in the given
/// order and readings by timestamp.
pub fn write_readings<'a, W: Write>(
    writer: W,
    series: impl IntoIterator<Item = &'a ConsumptionSeries>,
) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    writeln!(w, "{}", READINGS_HEADER.join(","))?;
    for s in series {
        for (t, v) in s.readings() {
            writeln!(w, "{},{},{}", s.meter_id(), t, v)?;
        }
    }
    w.flush()
}

/// Data-quality thresholds applied before extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QualityPolicy {
    pub min_days_per_context: u32,
    pub reject_all_zero: bool,
}

impl QualityPolicy {
    pub fn new(min_days_per_context: u32, reject_all_zero: bool) -> Option<Self> {
        (min_days_per_context >= 1).then_some(QualityPolicy {
            min_days_per_context,
            reject_all_zero,
        })
    }
}

impl Default for QualityPolicy {
    fn default() -> Self {
        QualityPolicy {
            min_days_per_context: 10,
            reject_all_zero: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    InsufficientCoverage {
        context: DayContext,
        observed_days: usize,
        required: u32,
    },
    AllZero,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::InsufficientCoverage {
                context,
                observed_days,
                required,
            } => write!(
                f,
                "insufficient {} coverage ({context}: {observed_days} of {required} days)",
                context.season()
            ),
            RejectReason::AllZero => f.write_str("all-zero consumption"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validation {
    Accepted,
    Rejected(RejectReason),
}

impl Validation {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Validation::Accepted)
    }
}

/// Number of distinct days with at least one reading, per context.
pub fn days_per_context(
    series: &ConsumptionSeries,
    seasons: &SeasonConfig,
    holidays: &HolidayCalendar,
) -> [usize; 4] {
    let dates: BTreeSet<NaiveDate> = series.readings().keys().map(|t| t.date()).collect();
    let mut counts = [0usize; 4];
    for d in dates {
        counts[classify_day(d, seasons, holidays).index()] += 1;
    }
    counts
}

/// Checks context coverage first, then the all-zero rule.
pub fn validate_series(
    series: &ConsumptionSeries,
    seasons: &SeasonConfig,
    holidays: &HolidayCalendar,
    policy: &QualityPolicy,
) -> Validation {
    let counts = days_per_context(series, seasons, holidays);
    for ctx in DayContext::ALL {
        let observed = counts[ctx.index()];
        if observed < policy.min_days_per_context as usize {
            return Validation::Rejected(RejectReason::InsufficientCoverage {
                context: ctx,
                observed_days: observed,
                required: policy.min_days_per_context,
            });
        }
    }
    if policy.reject_all_zero && series.readings().values().all(|&v| v == 0.0) {
        return Validation::Rejected(RejectReason::AllZero);
    }
    Validation::Accepted
}
