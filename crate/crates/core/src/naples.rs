//! The NAPLES index `R(t)`, lag profiles over a candidate grid and the
//! rolling (time-varying) lag estimate.
//!
//! `R(t; X, Y)` is the profit of trading the sign path of `Y` on the return
//! signs of `X`, minus the same with the roles swapped:
//!
//! ```text
//! R(t) = Σ_i b^X_{s_i} (Ŷ_{s_{i+1}} − Ŷ_{s_i}) 1{s_{i+1} < t}
//!      − Σ_j b^Y_{t_j} (X̂_{t_{j+1}} − X̂_{t_j}) 1{t_{j+1} < t}
//! ```
//!
//! Every term is an integer, so the sum is accumulated in `i64` and the index
//! is exactly antisymmetric. One pass over the merged tick sequence suffices.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ticks::{SignPath, TickSeries, TieRule};

/// Candidate lead-lag parameters, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagGrid {
    lags: Vec<f64>,
}

impl LagGrid {
    pub fn new(lags: Vec<f64>) -> Result<Self> {
        if lags.is_empty()
            || lags.iter().any(|l| !l.is_finite())
            || lags.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidGrid);
        }
        Ok(Self { lags })
    }

    /// `start, start+step, …` up to `stop`, inclusive when `step` divides the
    /// range. Each lag is computed as `start + k·step` to avoid drift.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::InvalidGrid);
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize + 1;
        Self::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    pub fn singleton(lag: f64) -> Result<Self> {
        Self::new(vec![lag])
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }
}

impl FromStr for LagGrid {
    type Err = Error;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
        match nums.as_deref() {
            Some([start, stop, step]) => Self::from_range(*start, *stop, *step),
            Some([single]) => Self::singleton(*single),
            _ => Err(Error::InvalidGrid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naples,
    Hry,
    Ds,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naples => "naples",
            Method::Hry => "hry",
            Method::Ds => "ds",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "naples" => Ok(Method::Naples),
            "hry" => Ok(Method::Hry),
            "ds" => Ok(Method::Ds),
            other => Err(format!("unknown method `{other}` (expected naples|hry|ds)")),
        }
    }
}

/// Contrast values over a lag grid and the selected lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagProfile {
    pub method: Method,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    /// The lag each value was actually evaluated at. Differs from `lags` only
    /// when an estimator snaps lags onto a discrete clock (DS).
    pub effective_lags: Vec<f64>,
    pub best_lag: f64,
    pub best_value: f64,
    pub warnings: Vec<String>,
}

impl LagProfile {
    pub fn new(method: Method, lags: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(lags.len(), values.len(), "one value per lag");
        assert!(!lags.is_empty(), "empty profile");
        let best = argmax_index(&lags, &values);
        Self {
            method,
            best_lag: lags[best],
            best_value: values[best],
            effective_lags: lags.clone(),
            lags,
            values,
            warnings: Vec::new(),
        }
    }

    /// The lag minimizing the contrast, with the same tie-break as the argmax.
    pub fn min_lag(&self) -> f64 {
        let negated: Vec<f64> = self.values.iter().map(|v| -v).collect();
        self.lags[argmax_index(&self.lags, &negated)]
    }
}

/// Index of the maximum value. Ties go to the smallest `|lag|`, then to the
/// smaller lag.
pub fn argmax_index(lags: &[f64], values: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..values.len() {
        let (v, b) = (values[k], values[best]);
        let better = v > b
            || (v == b
                && (lags[k].abs() < lags[best].abs()
                    || (lags[k].abs() == lags[best].abs() && lags[k] < lags[best])));
        if better {
            best = k;
        }
    }
    best
}

pub fn estimate_lag(profile: &LagProfile) -> f64 {
    profile.lags[argmax_index(&profile.lags, &profile.values)]
}

/// `Σ_k b^lead_k (F̂(u_{k+1}) − F̂(u_k)) 1{u_{k+1} < horizon}` where `F̂` is the
/// cumulative sign path of `follow`. Offsets are added to the stamped times
/// exactly as [`TickSeries::shift`] would.
fn one_sided(
    lead: &SignPath,
    lead_offset: f64,
    follow: &SignPath,
    follow_offset: f64,
    horizon: f64,
    rule: TieRule,
) -> i64 {
    let lead_times = lead.times();
    let follow_times = follow.times();
    let signs = lead.signs();

    let mut j = 0usize;
    let mut advance = |u: f64| -> usize {
        match rule {
            TieRule::Strict => {
                while j < follow_times.len() && follow_times[j] + follow_offset < u {
                    j += 1;
                }
            }
            TieRule::Inclusive => {
                while j < follow_times.len() && follow_times[j] + follow_offset <= u {
                    j += 1;
                }
            }
        }
        j
    };

    let mut acc = 0i64;
    let mut prev = advance(lead_times[0] + lead_offset);
    for k in 0..signs.len() - 1 {
        let next = lead_times[k + 1] + lead_offset;
        if !(next < horizon) {
            break;
        }
        let count = advance(next);
        if signs[k] != 0 {
            acc += i64::from(signs[k]) * (follow.prefix(count) - follow.prefix(prev));
        }
        prev = count;
    }
    acc
}

/// Integer NAPLES index of `x` against `y` with `y`'s clock moved by
/// `y_offset`, evaluated at horizon `t`.
pub fn naples_r_paths(x: &SignPath, y: &SignPath, y_offset: f64, t: f64, rule: TieRule) -> i64 {
    one_sided(x, 0.0, y, y_offset, t, rule) - one_sided(y, y_offset, x, 0.0, t, rule)
}

/// `R(t; X, Y)` as an exact integer.
pub fn naples_r_int(x: &TickSeries, y: &TickSeries, t: f64) -> i64 {
    naples_r_int_with(x, y, t, TieRule::Strict)
}

pub fn naples_r_int_with(x: &TickSeries, y: &TickSeries, t: f64, rule: TieRule) -> i64 {
    naples_r_paths(&x.sign_path(), &y.sign_path(), 0.0, t, rule)
}

pub fn naples_r(x: &TickSeries, y: &TickSeries, t: f64) -> f64 {
    naples_r_int(x, y, t) as f64
}

pub fn naples_r_with(x: &TickSeries, y: &TickSeries, t: f64, rule: TieRule) -> f64 {
    naples_r_int_with(x, y, t, rule) as f64
}

/// `R` over the whole sample: every term whose closing tick exists counts.
pub fn naples_r_full(x: &TickSeries, y: &TickSeries, rule: TieRule) -> i64 {
    naples_r_int_with(x, y, f64::INFINITY, rule)
}

/// `R(T, X_t, Y_{t+θ})` for every `θ` in the grid.
///
/// The series `Y_{t+θ}` is observed at `t_j − θ`, so a positive best lag means
/// `x` leads `y`.
pub fn naples_profile(x: &TickSeries, y: &TickSeries, grid: &LagGrid) -> LagProfile {
    naples_profile_with(x, y, grid, TieRule::Strict)
}

pub fn naples_profile_with(
    x: &TickSeries,
    y: &TickSeries,
    grid: &LagGrid,
    rule: TieRule,
) -> LagProfile {
    let xp = x.sign_path();
    let yp = y.sign_path();
    let values: Vec<f64> = grid
        .lags()
        .par_iter()
        .map(|&lag| naples_r_paths(&xp, &yp, -lag, f64::INFINITY, rule) as f64)
        .collect();
    LagProfile::new(Method::Naples, grid.lags().to_vec(), values)
}

/// Time-varying lag estimates over sliding closed windows `[e − window, e]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingEstimate {
    pub window_ends: Vec<f64>,
    /// `None` marks a window holding fewer than two ticks of either series.
    pub lags_hat: Vec<Option<f64>>,
    pub values: Vec<Option<f64>>,
    pub window_length: f64,
    pub step: f64,
}

impl RollingEstimate {
    pub fn len(&self) -> usize {
        self.window_ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window_ends.is_empty()
    }
}

pub fn rolling_estimate(
    x: &TickSeries,
    y: &TickSeries,
    grid: &LagGrid,
    window: f64,
    step: f64,
) -> Result<RollingEstimate> {
    rolling_estimate_by(x, y, window, step, |xw, yw| naples_profile(xw, yw, grid))
}

/// Rolling driver with a caller-supplied per-window estimator.
pub fn rolling_estimate_by<F>(
    x: &TickSeries,
    y: &TickSeries,
    window: f64,
    step: f64,
    estimator: F,
) -> Result<RollingEstimate>
where
    F: Fn(&TickSeries, &TickSeries) -> LagProfile + Sync,
{
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::InvalidWindow(format!(
            "window must be positive, got {window}"
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidWindow(format!(
            "step must be positive, got {step}"
        )));
    }
    let lo = x.first_time().min(y.first_time());
    let hi = x.last_time().max(y.last_time());
    let slack = 1e-9 * hi.abs().max(1.0);
    if window > hi - lo + slack {
        return Err(Error::WindowTooShort);
    }

    let mut window_ends = Vec::new();
    for k in 0.. {
        let end = lo + window + k as f64 * step;
        if end > hi + slack {
            break;
        }
        window_ends.push(end);
    }

    let estimates: Vec<Option<(f64, f64)>> = window_ends
        .par_iter()
        .map(|&end| {
            let xw = x.restrict(end - window, end)?;
            let yw = y.restrict(end - window, end)?;
            let profile = estimator(&xw, &yw);
            Some((profile.best_lag, profile.best_value))
        })
        .collect();
    if estimates.iter().all(Option::is_none) {
        return Err(Error::WindowTooShort);
    }

    Ok(RollingEstimate {
        window_ends,
        lags_hat: estimates.iter().map(|e| e.map(|(l, _)| l)).collect(),
        values: estimates.iter().map(|e| e.map(|(_, v)| v)).collect(),
        window_length: window,
        step,
    })
}
