//! Reference lead-lag estimators: the Hayashi–Yoshida covariance, the
//! Hoffmann–Rosenbaum–Yoshida shifted contrast and the Dobreva–Schaumburg
//! co-activity index.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::naples::{LagGrid, LagProfile, Method};
use crate::ticks::TickSeries;

/// HY sum of increment products over overlapping observation intervals, with
/// the first series' clock moved by `a_offset`.
///
/// Interval pairs are visited in order of their intersections, so swapping
/// the arguments reproduces the same floating-point sum bit for bit.
fn hy_kernel(
    a_times: &[f64],
    a_offset: f64,
    a_rets: &[f64],
    b_times: &[f64],
    b_rets: &[f64],
) -> f64 {
    let (n, m) = (a_times.len(), b_times.len());
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i + 1 < n && j + 1 < m {
        let (a0, a1) = (a_times[i] + a_offset, a_times[i + 1] + a_offset);
        let (b0, b1) = (b_times[j], b_times[j + 1]);
        if a0.max(b0) < a1.min(b1) {
            acc += a_rets[i] * b_rets[j];
        }
        if a1 < b1 {
            i += 1;
        } else if b1 < a1 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    acc
}

/// Hayashi–Yoshida covariance of the log prices, `O(n + m)`.
pub fn hy_covariance(x: &TickSeries, y: &TickSeries) -> f64 {
    hy_kernel(
        x.times(),
        0.0,
        &x.log_returns(),
        y.times(),
        &y.log_returns(),
    )
}

fn hry_returns(x: &TickSeries, xr: &[f64], y: &TickSeries, yr: &[f64], lag: f64) -> f64 {
    // X_{s−θ} is observed at s_i + θ. For θ < 0 the same overlaps are obtained
    // by moving y forward by |θ|, which keeps (x, y, θ) and (y, x, −θ) on the
    // identical code path.
    if lag >= 0.0 {
        hy_kernel(x.times(), lag, xr, y.times(), yr)
    } else {
        hy_kernel(y.times(), -lag, yr, x.times(), xr)
    }
}

/// `U(θ̃)`: HY covariance after moving `x`'s clock by `+θ̃`. Large `|U|` at a
/// positive lag means `x` leads `y`.
pub fn hry_contrast(x: &TickSeries, y: &TickSeries, lag: f64) -> f64 {
    hry_returns(x, &x.log_returns(), y, &y.log_returns(), lag)
}

/// `|U(θ̃)|` over the grid, maximized with the standard tie-break.
pub fn hry_estimate(x: &TickSeries, y: &TickSeries, grid: &LagGrid) -> LagProfile {
    let xr = x.log_returns();
    let yr = y.log_returns();
    let values: Vec<f64> = grid
        .lags()
        .par_iter()
        .map(|&lag| hry_returns(x, &xr, y, &yr, lag).abs())
        .collect();
    LagProfile::new(Method::Hry, grid.lags().to_vec(), values)
}

/// Per-slot trading activity of two assets on a shared clock of resolution
/// `delta`. Slot `k` covers `[origin + kδ, origin + (k+1)δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityGrid {
    pub delta: f64,
    pub origin: f64,
    pub x_active: Vec<bool>,
    pub y_active: Vec<bool>,
}

impl ActivityGrid {
    pub fn new(x: &TickSeries, y: &TickSeries, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::ZeroResolution(delta));
        }
        let origin = (x.first_time().min(y.first_time()) / delta).floor() * delta;
        let end = x.last_time().max(y.last_time());
        let slots = ((end - origin) / delta).floor() as usize + 1;
        let mark = |s: &TickSeries| {
            let mut active = vec![false; slots];
            for &t in s.times() {
                let k = (((t - origin) / delta).floor().max(0.0) as usize).min(slots - 1);
                active[k] = true;
            }
            active
        };
        Ok(Self {
            delta,
            origin,
            x_active: mark(x),
            y_active: mark(y),
        })
    }

    pub fn slots(&self) -> usize {
        self.x_active.len()
    }

    /// DS index at integer slot shift `t`: co-activity of `x` at `i` and `y` at
    /// `i + t` over `i ∈ [|t|, N−1−|t|]`, normalized by the smaller activity
    /// count over the same range. Returns `(value, degenerate)` where
    /// `degenerate` flags a zero denominator (value 0).
    pub fn ds_at(&self, shift: i64) -> Result<(f64, bool)> {
        let slots = self.slots();
        if shift.unsigned_abs() as usize >= slots {
            return Err(Error::SlotShiftOutOfRange { shift, slots });
        }
        let pad = shift.unsigned_abs() as usize;
        let (mut both, mut x_count, mut y_count) = (0usize, 0usize, 0usize);
        if slots > 2 * pad {
            for i in pad..slots - pad {
                let x_on = self.x_active[i];
                let y_on = self.y_active[(i as i64 + shift) as usize];
                both += usize::from(x_on && y_on);
                x_count += usize::from(x_on);
                y_count += usize::from(y_on);
            }
        }
        let den = x_count.min(y_count);
        if den == 0 {
            Ok((0.0, true))
        } else {
            Ok((both as f64 / den as f64, false))
        }
    }
}

pub fn ds_index(x: &TickSeries, y: &TickSeries, delta: f64, shift: i64) -> Result<f64> {
    Ok(ActivityGrid::new(x, y, delta)?.ds_at(shift)?.0)
}

/// DS values over the grid, each lag snapped to the nearest slot shift.
pub fn ds_estimate(
    x: &TickSeries,
    y: &TickSeries,
    delta: f64,
    grid: &LagGrid,
) -> Result<LagProfile> {
    let activity = ActivityGrid::new(x, y, delta)?;
    let shifts: Vec<i64> = grid
        .lags()
        .iter()
        .map(|l| (l / delta).round() as i64)
        .collect();
    let evaluated: Vec<(f64, bool)> = shifts
        .par_iter()
        .map(|&k| activity.ds_at(k))
        .collect::<Result<_>>()?;

    let values = evaluated.iter().map(|(v, _)| *v).collect();
    let mut profile = LagProfile::new(Method::Ds, grid.lags().to_vec(), values);
    profile.effective_lags = shifts.iter().map(|&k| k as f64 * delta).collect();

    let rounded = profile
        .lags
        .iter()
        .zip(&profile.effective_lags)
        .any(|(a, b)| (a - b).abs() > 1e-9 * delta);
    if rounded {
        profile.warnings.push(format!(
            "lags rounded to the nearest multiple of delta={delta}"
        ));
    }
    for (lag, (_, degenerate)) in profile.lags.iter().zip(&evaluated) {
        if *degenerate {
            profile
                .warnings
                .push(format!("no activity in range at lag {lag}; value set to 0"));
        }
    }
    Ok(profile)
}
