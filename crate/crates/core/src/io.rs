//! CSV and JSON formats for profiles, rolling output, curves and reports.
//!
//! Every writer here has a matching reader.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::naples::RollingEstimate;

fn ser<E: std::fmt::Display>(e: E) -> Error {
    Error::Serialize(e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    theta: f64,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RollingRow {
    window_end: f64,
    theta_hat: Option<f64>,
    value: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    theta: f64,
    expected_r: f64,
}

/// `theta,value` rows.
pub fn write_profile_csv<W: Write>(lags: &[f64], values: &[f64], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (&theta, &value) in lags.iter().zip(values) {
        wtr.serialize(ProfileRow { theta, value }).map_err(ser)?;
    }
    wtr.flush().map_err(ser)
}

pub fn read_profile_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut lags = Vec::new();
    let mut values = Vec::new();
    for row in rdr.deserialize::<ProfileRow>() {
        let row = row.map_err(ser)?;
        lags.push(row.theta);
        values.push(row.value);
    }
    Ok((lags, values))
}

/// `window_end,theta_hat,value` rows; gap windows leave the last two empty.
pub fn write_rolling_csv<W: Write>(est: &RollingEstimate, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for k in 0..est.len() {
        wtr.serialize(RollingRow {
            window_end: est.window_ends[k],
            theta_hat: est.lags_hat[k],
            value: est.values[k],
        })
        .map_err(ser)?;
    }
    wtr.flush().map_err(ser)
}

/// Reads rolling rows back; window length and step are not stored in the CSV.
pub fn read_rolling_csv<R: Read>(
    reader: R,
    window_length: f64,
    step: f64,
) -> Result<RollingEstimate> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut est = RollingEstimate {
        window_ends: Vec::new(),
        lags_hat: Vec::new(),
        values: Vec::new(),
        window_length,
        step,
    };
    for row in rdr.deserialize::<RollingRow>() {
        let row = row.map_err(ser)?;
        est.window_ends.push(row.window_end);
        est.lags_hat.push(row.theta_hat);
        est.values.push(row.value);
    }
    Ok(est)
}

/// `theta,expected_r` rows.
pub fn write_curve_csv<W: Write>(curve: &[(f64, f64)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for &(theta, expected_r) in curve {
        wtr.serialize(CurveRow { theta, expected_r }).map_err(ser)?;
    }
    wtr.flush().map_err(ser)
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<CurveRow>()
        .map(|row| row.map(|r| (r.theta, r.expected_r)).map_err(ser))
        .collect()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, value).map_err(ser)
}

pub fn read_json<T: DeserializeOwned, R: Read>(reader: R) -> Result<T> {
    serde_json::from_reader(reader).map_err(ser)
}

/// Creates `path` for writing, mapping failures to [`Error::Io`].
pub fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn open_file(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}
