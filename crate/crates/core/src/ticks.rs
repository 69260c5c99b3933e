//! Tick series: validated price observations of a single asset, the sign
//! transform used by the NAPLES index, time translation and CSV ingestion.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamped prices of one asset, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    times: Vec<f64>,
    prices: Vec<f64>,
    label: String,
}

impl TickSeries {
    /// Validates raw observations. Input is never reordered or deduplicated.
    pub fn new(times: Vec<f64>, prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        validate(&times, &prices)?;
        Ok(Self {
            times,
            prices,
            label: label.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Always false for a validated series; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// `log(p[k+1] / p[k])` for every consecutive pair.
    pub fn log_returns(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
    }

    pub fn log_prices(&self) -> Vec<f64> {
        self.prices.iter().map(|p| p.ln()).collect()
    }

    pub fn sign_path(&self) -> SignPath {
        SignPath::from_series(self)
    }

    /// Translates every timestamp by `theta`; prices are untouched.
    pub fn shift(&self, theta: f64) -> TickSeries {
        TickSeries {
            times: self.times.iter().map(|t| t + theta).collect(),
            prices: self.prices.clone(),
            label: format!("{}{:+}", self.label, theta),
        }
    }

    /// Ticks with `lo <= time <= hi`, or `None` when fewer than two remain.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<TickSeries> {
        let start = self.times.partition_point(|&t| t < lo);
        let end = self.times.partition_point(|&t| t <= hi);
        if end < start + 2 {
            return None;
        }
        Some(TickSeries {
            times: self.times[start..end].to_vec(),
            prices: self.prices[start..end].to_vec(),
            label: self.label.clone(),
        })
    }
}

impl fmt::Display for TickSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} ticks, {}..{})",
            self.label,
            self.len(),
            self.first_time(),
            self.last_time()
        )
    }
}

pub fn validate(times: &[f64], prices: &[f64]) -> Result<()> {
    if times.len() != prices.len() {
        return Err(Error::LengthMismatch {
            times: times.len(),
            prices: prices.len(),
        });
    }
    if times.len() < 2 {
        return Err(Error::TooShort { len: times.len() });
    }
    for (index, (&t, &p)) in times.iter().zip(prices).enumerate() {
        if !t.is_finite() || p.is_nan() || p.is_infinite() {
            return Err(Error::NonFinite { index });
        }
        if p <= 0.0 {
            return Err(Error::NonPositivePrice { index, price: p });
        }
        if index > 0 && t <= times[index - 1] {
            return Err(Error::NonMonotoneTime { index });
        }
    }
    Ok(())
}

/// Three-valued sign: zero maps to zero.
pub fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// How a tick of the other series at exactly the evaluation time is counted
/// when the cumulative sign path is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// Sum over `u_k < t`: a tick at `t` itself is not yet seen.
    #[default]
    Strict,
    /// Sum over `u_k <= t`: a tick at `t` itself has already been seen.
    Inclusive,
}

/// Return signs of a series and their running sum.
///
/// `signs[k]` is the sign of the log return from tick `k` to tick `k+1` and is
/// stamped with the time of tick `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPath {
    times: Vec<f64>,
    signs: Vec<i8>,
    cum: Vec<i64>,
}

impl SignPath {
    pub fn from_series(series: &TickSeries) -> Self {
        let signs: Vec<i8> = series.log_returns().into_iter().map(sign).collect();
        let cum = signs
            .iter()
            .scan(0i64, |acc, &b| {
                *acc += i64::from(b);
                Some(*acc)
            })
            .collect();
        Self {
            times: series.times()[1..].to_vec(),
            signs,
            cum,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn cum(&self) -> &[i64] {
        &self.cum
    }

    /// Number of signed ticks stamped strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&u| u < t)
    }

    /// Number of signed ticks stamped at or before `t`.
    pub fn count_through(&self, t: f64) -> usize {
        self.times.partition_point(|&u| u <= t)
    }

    /// The cumulative sign path at `t`: `Σ 1{u_k < t} b_k`.
    pub fn eval_cum(&self, t: f64) -> i64 {
        self.prefix(self.count_before(t))
    }

    /// Like [`eval_cum`](Self::eval_cum) but counting a tick stamped exactly at `t`.
    pub fn eval_cum_through(&self, t: f64) -> i64 {
        self.prefix(self.count_through(t))
    }

    pub fn eval_cum_with(&self, t: f64, rule: TieRule) -> i64 {
        match rule {
            TieRule::Strict => self.eval_cum(t),
            TieRule::Inclusive => self.eval_cum_through(t),
        }
    }

    /// Sum of the first `count` signs.
    pub fn prefix(&self, count: usize) -> i64 {
        if count == 0 {
            0
        } else {
            self.cum[count - 1]
        }
    }
}

/// How the timestamp column of a tick CSV is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeFormat {
    /// Integer milliseconds since the epoch, converted to seconds.
    EpochMillis,
    /// Decimal seconds.
    #[default]
    Seconds,
}

impl std::str::FromStr for TimeFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "millis" | "ms" | "epoch-millis" => Ok(Self::EpochMillis),
            "seconds" | "s" => Ok(Self::Seconds),
            other => Err(format!(
                "unknown time format `{other}` (expected millis|seconds)"
            )),
        }
    }
}

/// Reads a `timestamp,price` CSV with an optional header row.
pub fn read_ticks_csv(path: impl AsRef<Path>, format: TimeFormat) -> Result<TickSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_ticks(file, format, path, label)
}

pub(crate) fn parse_ticks<R: Read>(
    reader: R,
    format: TimeFormat,
    path: &Path,
    label: String,
) -> Result<TickSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut times = Vec::new();
    let mut prices = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row as u64 + 1;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let line = record.position().map_or(line, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let time = match format {
            TimeFormat::EpochMillis => record[0].parse::<i64>().map(|ms| ms as f64 / 1000.0).ok(),
            TimeFormat::Seconds => record[0].parse::<f64>().ok(),
        };
        let Some(time) = time else {
            if row == 0 {
                // header row
                continue;
            }
            return Err(parse_err(line, format!("bad timestamp `{}`", &record[0])));
        };
        let price = record[1]
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("bad price `{}`", &record[1])))?;
        times.push(time);
        prices.push(price);
    }
    TickSeries::new(times, prices, label)
}

/// Writes a series as `timestamp,price` with timestamps in decimal seconds.
pub fn write_ticks_csv<W: Write>(series: &TickSeries, writer: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["timestamp", "price"])?;
    for (t, p) in series.times().iter().zip(series.prices()) {
        wtr.write_record([t.to_string(), p.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
