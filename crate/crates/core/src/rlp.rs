//! Representative Load Patterns: per-meter mean hourly consumption in each of
//! the four loading contexts, scaled so the largest of the 96 values is 1.

use std::collections::BTreeSet;
use std::io::{self, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::calendar::{classify_day, DayContext, HolidayCalendar, SeasonConfig};
use crate::ingest::{validate_series, ConsumptionSeries, QualityPolicy, Validation};

pub const HOURS: usize = 24;
/// Length of an RLP vector: 4 contexts × 24 hours.
pub const RLP_LEN: usize = 4 * HOURS;

#[derive(Debug, Error)]
pub enum RlpError {
    #[error("no readings for {context} hour {hour:02}")]
    EmptyCell { context: DayContext, hour: usize },
    #[error("maximum mean consumption is zero")]
    ZeroMaximum,
    #[error("RLP file: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl RlpError {
    /// True for errors raised by unvalidated, degenerate input to extraction.
    pub fn is_contract_violation(&self) -> bool {
        matches!(self, RlpError::EmptyCell { .. } | RlpError::ZeroMaximum)
    }
}

/// A 96-value load pattern in `[0, 1]` with maximum exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Rlp {
    meter_id: String,
    values: Vec<f64>,
}

impl Rlp {
    /// Wraps already-normalized values; checks length and finiteness only.
    pub fn from_values(meter_id: impl Into<String>, values: Vec<f64>) -> Result<Self, RlpError> {
        if values.len() != RLP_LEN {
            return Err(RlpError::Format(format!(
                "expected {RLP_LEN} values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RlpError::Format("non-finite value".into()));
        }
        Ok(Rlp {
            meter_id: meter_id.into(),
            values,
        })
    }

    pub fn meter_id(&self) -> &str {
        &self.meter_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, context: DayContext, hour: usize) -> f64 {
        self.values[context.index() * HOURS + hour]
    }

    /// The 24 values of one context.
    pub fn block(&self, context: DayContext) -> &[f64] {
        let start = context.index() * HOURS;
        &self.values[start..start + HOURS]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub meter_id: String,
    pub reason: String,
}

/// Extraction result for a population: accepted patterns plus rejected meters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RlpMatrix {
    pub rows: Vec<Rlp>,
    pub rejected: Vec<Rejection>,
}

impl RlpMatrix {
    /// Row vectors, in row order.
    pub fn data(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn meter_ids(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.meter_id()).collect()
    }
}

/// Computes the RLP of a series that has passed [`validate_series`].
///
/// Each raw feature is the mean of the readings observed at that hour on days
/// of that context; missing hours are left out of the mean.
pub fn extract_rlp(
    series: &ConsumptionSeries,
    seasons: &SeasonConfig,
    holidays: &HolidayCalendar,
) -> Result<Rlp, RlpError> {
    let mut sums = [0.0f64; RLP_LEN];
    let mut counts = [0u32; RLP_LEN];
    let mut current: Option<(chrono::NaiveDate, usize)> = None;
    for (stamp, &kwh) in series.readings() {
        let ctx = match current {
            Some((d, c)) if d == stamp.date() => c,
            _ => {
                let c = classify_day(stamp.date(), seasons, holidays).index();
                current = Some((stamp.date(), c));
                c
            }
        };
        let cell = ctx * HOURS + stamp.hour() as usize;
        sums[cell] += kwh;
        counts[cell] += 1;
    }

    let mut values = vec![0.0; RLP_LEN];
    for (cell, v) in values.iter_mut().enumerate() {
        if counts[cell] == 0 {
            return Err(RlpError::EmptyCell {
                context: DayContext::ALL[cell / HOURS],
                hour: cell % HOURS,
            });
        }
        *v = sums[cell] / counts[cell] as f64;
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(RlpError::ZeroMaximum);
    }
    for v in &mut values {
        *v /= max;
    }
    Ok(Rlp {
        meter_id: series.meter_id().to_string(),
        values,
    })
}

/// Validates and extracts every meter. Output rows and rejections are ordered
/// by meter id regardless of input order; a repeated meter id is rejected.
pub fn extract_all(
    series: &[ConsumptionSeries],
    seasons: &SeasonConfig,
    holidays: &HolidayCalendar,
    policy: &QualityPolicy,
) -> RlpMatrix {
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&a, &b| series[a].meter_id().cmp(series[b].meter_id()));

    let mut seen = BTreeSet::new();
    let duplicate: Vec<bool> = order
        .iter()
        .map(|&i| !seen.insert(series[i].meter_id()))
        .collect();

    let outcomes: Vec<Result<Rlp, Rejection>> = order
        .par_iter()
        .zip(duplicate.par_iter())
        .map(|(&i, &dup)| {
            let s = &series[i];
            let reject = |reason: String| Rejection {
                meter_id: s.meter_id().to_string(),
                reason,
            };
            if dup {
                return Err(reject("duplicate meter id".into()));
            }
            match validate_series(s, seasons, holidays, policy) {
                Validation::Rejected(r) => Err(reject(r.to_string())),
                Validation::Accepted => {
                    extract_rlp(s, seasons, holidays).map_err(|e| reject(e.to_string()))
                }
            }
        })
        .collect();

    let mut m = RlpMatrix::default();
    for o in outcomes {
        match o {
            Ok(r) => m.rows.push(r),
            Err(r) => m.rejected.push(r),
        }
    }
    m
}

/// Column names after `meter_id`: `swd_h00..swd_h23, swe_h00, .., wwe_h23`.
pub fn feature_names() -> Vec<String> {
    DayContext::ALL
        .iter()
        .flat_map(|c| (0..HOURS).map(move |h| format!("{}_h{h:02}", c.column_prefix())))
        .collect()
}

/// Writes the RLP CSV. Values use the shortest representation that parses
/// back to the identical `f64`.
pub fn write_rlp_csv<'a, W: Write>(
    writer: W,
    rows: impl IntoIterator<Item = &'a Rlp>,
) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    write!(w, "meter_id")?;
    for name in feature_names() {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for r in rows {
        write!(w, "{}", r.meter_id)?;
        for v in &r.values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn read_rlp_csv<R: Read>(reader: R) -> Result<Vec<Rlp>, RlpError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| RlpError::Format(e.to_string()))?
        .clone();
    let expected: Vec<String> = std::iter::once("meter_id".to_string())
        .chain(feature_names())
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(RlpError::Format("unexpected header".into()));
    }
    let mut rows = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| RlpError::Format(e.to_string()))?;
        let id = rec[0].to_string();
        if !ids.insert(id.clone()) {
            return Err(RlpError::Format(format!("duplicate meter id {id}")));
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| RlpError::Format(format!("row {}: {e}", i + 2)))?;
        rows.push(Rlp::from_values(id, values)?);
    }
    Ok(rows)
}
