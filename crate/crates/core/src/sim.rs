//! Correlated geometric Brownian pairs with a lead-lag, observed on random grids.
//!
//! `X_t = x0·exp(σ1 B_t)` and `Y_t = y0·exp(ρσ2 B_{t−θ} + σ2√(1−ρ²) W_{t−θ})`,
//! with `B` and `W` independent two-sided Brownian motions pinned at 0. No
//! drift correction is applied.
//!
//! Randomness is split into ChaCha streams so that `X` does not depend on
//! anything that only affects `Y`: `B` is drawn on `{0} ∪ s` first, and the
//! points `t_j − θ` are then filled in from a separate stream by Brownian
//! bridge (or free extension beyond the ends).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ticks::TickSeries;

/// Points closer than this share one Brownian value.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    GridS = 1,
    GridT = 2,
    PathB = 3,
    PathW = 4,
    Bridge = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Inter-arrival law: Normal(mean, sd) gaps, non-positive draws rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingLaw {
    pub mean: f64,
    pub sd: f64,
}

impl SamplingLaw {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gap mean must be positive, got {mean}"
            )));
        }
        if !(sd >= 0.0) || !sd.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gap sd must be >= 0, got {sd}"
            )));
        }
        Ok(Self { mean, sd })
    }
}

impl Default for SamplingLaw {
    fn default() -> Self {
        Self {
            mean: 10.0,
            sd: 2.0,
        }
    }
}

/// Observation times on `[0, horizon]` from stream `GridS`.
pub fn sample_times(law: SamplingLaw, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    sample_times_rng(law, horizon, &mut stream_rng(seed, Stream::GridS))
}

pub fn sample_times_rng<R: Rng>(law: SamplingLaw, horizon: f64, rng: &mut R) -> Result<Vec<f64>> {
    let law = SamplingLaw::new(law.mean, law.sd)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let normal = Normal::new(law.mean, law.sd).expect("validated law");
    let mut times = vec![0.0];
    let mut now = 0.0;
    loop {
        let gap = loop {
            let g = normal.sample(rng);
            if g > 0.0 {
                break g;
            }
        };
        now += gap;
        if now >= horizon {
            times.push(horizon);
            return Ok(times);
        }
        times.push(now);
    }
}

/// Independent `s` and `t` grids from streams `GridS` and `GridT`.
pub fn sample_grids(law: SamplingLaw, horizon: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = sample_times_rng(law, horizon, &mut stream_rng(seed, Stream::GridS))?;
    let t = sample_times_rng(law, horizon, &mut stream_rng(seed, Stream::GridT))?;
    Ok((s, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmPairConfig {
    pub x0: f64,
    pub y0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub theta: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl Default for GbmPairConfig {
    fn default() -> Self {
        Self {
            x0: 100.0,
            y0: 100.0,
            sigma1: 0.001,
            sigma2: 0.001,
            rho: 0.9,
            theta: 10.0,
            horizon: 1e4,
            seed: 0,
        }
    }
}

impl GbmPairConfig {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |what: &str, v: f64| Err(Error::InvalidConfig(format!("{what} out of range: {v}")));
        if !(self.x0 > 0.0) || !self.x0.is_finite() {
            return bad("x0", self.x0);
        }
        if !(self.y0 > 0.0) || !self.y0.is_finite() {
            return bad("y0", self.y0);
        }
        if !(self.sigma1 > 0.0) || !self.sigma1.is_finite() {
            return bad("sigma1", self.sigma1);
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return bad("sigma2", self.sigma2);
        }
        if !(self.rho.abs() <= 1.0) {
            return bad("rho", self.rho);
        }
        if !self.theta.is_finite() {
            return bad("theta", self.theta);
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad("horizon", self.horizon);
        }
        Ok(())
    }
}

/// Brownian values known at sorted, distinct times.
struct Known {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Known {
    fn lookup(&self, u: f64) -> Option<f64> {
        let k = self.times.partition_point(|&v| v < u - DEDUP_TOLERANCE);
        (k < self.times.len() && (self.times[k] - u).abs() <= DEDUP_TOLERANCE)
            .then(|| self.values[k])
    }
}

/// Sorted unique points with 0 included; returns the points and the index of 0.
fn anchored_points(points: &[f64]) -> (Vec<f64>, usize) {
    let mut all: Vec<f64> = points.iter().copied().chain(std::iter::once(0.0)).collect();
    all.sort_by(f64::total_cmp);
    let mut unique: Vec<f64> = Vec::with_capacity(all.len());
    for u in all {
        match unique.last() {
            Some(&last) if u - last <= DEDUP_TOLERANCE => {}
            _ => unique.push(u),
        }
    }
    // an exact 0 must be the anchor even if a neighbour within tolerance came first
    let zero = unique
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .unwrap();
    unique[zero] = 0.0;
    (unique, zero)
}

/// Two-sided Brownian path pinned at `B(0) = 0`, by exact independent increments
/// walking away from 0 in both directions.
fn brownian_path<R: Rng>(points: &[f64], rng: &mut R) -> Known {
    let (times, zero) = anchored_points(points);
    let mut values = vec![0.0; times.len()];
    for k in zero + 1..times.len() {
        let z: f64 = rng.sample(StandardNormal);
        values[k] = values[k - 1] + (times[k] - times[k - 1]).sqrt() * z;
    }
    for k in (0..zero).rev() {
        let z: f64 = rng.sample(StandardNormal);
        values[k] = values[k + 1] + (times[k + 1] - times[k]).sqrt() * z;
    }
    Known { times, values }
}

/// Values of the path at `extra`, conditioned on `known`, drawn from `rng`.
fn fill_in<R: Rng>(known: &Known, extra: &[f64], rng: &mut R) -> Vec<f64> {
    let mut order: Vec<usize> = (0..extra.len()).collect();
    order.sort_by(|&a, &b| extra[a].total_cmp(&extra[b]));

    let n = known.times.len();
    let lo = known.times[0];
    let mut out = vec![0.0; extra.len()];
    let mut last: Option<(f64, f64)> = None;
    let mut below = Vec::new();

    for &idx in &order {
        let u = extra[idx];
        if let Some(v) = known.lookup(u) {
            out[idx] = v;
            continue;
        }
        if let Some((lu, lv)) = last {
            if (u - lu).abs() <= DEDUP_TOLERANCE {
                out[idx] = lv;
                continue;
            }
        }
        if u < lo {
            below.push(idx);
            continue;
        }
        let k = known.times.partition_point(|&v| v < u);
        let (a, va) = match last {
            Some((lu, lv)) if lu > known.times[k - 1] => (lu, lv),
            _ => (known.times[k - 1], known.values[k - 1]),
        };
        let z: f64 = rng.sample(StandardNormal);
        let v = if k < n {
            let (b, vb) = (known.times[k], known.values[k]);
            let w = (u - a) / (b - a);
            va + w * (vb - va) + ((u - a) * (b - u) / (b - a)).sqrt() * z
        } else {
            va + (u - a).sqrt() * z
        };
        out[idx] = v;
        last = Some((u, v));
    }

    // free extension below the earliest known point, walking downwards
    let (mut a, mut va) = (lo, known.values[0]);
    for &idx in below.iter().rev() {
        let u = extra[idx];
        if (a - u).abs() <= DEDUP_TOLERANCE {
            out[idx] = va;
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        va += (a - u).sqrt() * z;
        a = u;
        out[idx] = va;
    }
    out
}

/// A correlated pair at `s_times` and `t_times` with constant lead-lag `cfg.theta`.
pub fn gbm_pair(
    cfg: &GbmPairConfig,
    s_times: &[f64],
    t_times: &[f64],
) -> Result<(TickSeries, TickSeries)> {
    let theta = cfg.theta;
    gbm_pair_with_lag(cfg, s_times, t_times, |_| theta)
}

/// As [`gbm_pair`] with a time-varying lag: `Y` at `t` loads on `B` at `t − lag(t)`.
pub fn gbm_pair_with_lag<F>(
    cfg: &GbmPairConfig,
    s_times: &[f64],
    t_times: &[f64],
    lag: F,
) -> Result<(TickSeries, TickSeries)>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let b = brownian_path(s_times, &mut stream_rng(cfg.seed, Stream::PathB));
    let x_log: Vec<f64> = s_times
        .iter()
        .map(|&s| b.lookup(s).expect("s point is on the path"))
        .collect();

    let lagged: Vec<f64> = t_times.iter().map(|&t| t - lag(t)).collect();
    if let Some(index) = lagged.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let b_lagged = fill_in(&b, &lagged, &mut stream_rng(cfg.seed, Stream::Bridge));
    let w = brownian_path(&lagged, &mut stream_rng(cfg.seed, Stream::PathW));

    let x_prices: Vec<f64> = x_log
        .iter()
        .map(|&v| cfg.x0 * (cfg.sigma1 * v).exp())
        .collect();
    let idio = cfg.sigma2 * (1.0 - cfg.rho * cfg.rho).max(0.0).sqrt();
    let y_prices: Vec<f64> = lagged
        .iter()
        .zip(&b_lagged)
        .map(|(&u, &bu)| {
            let wu = w.lookup(u).expect("lagged point is on the path");
            cfg.y0 * (cfg.rho * cfg.sigma2 * bu + idio * wu).exp()
        })
        .collect();

    let x = TickSeries::new(s_times.to_vec(), x_prices, "x")?;
    let y = TickSeries::new(t_times.to_vec(), y_prices, "y")?;
    Ok((x, y))
}

/// Grids and pair in one call: grids from `cfg.seed`, paths from the same seed.
pub fn simulate(cfg: &GbmPairConfig, law: SamplingLaw) -> Result<(TickSeries, TickSeries)> {
    let (s, t) = sample_grids(law, cfg.horizon, cfg.seed)?;
    gbm_pair(cfg, &s, &t)
}

/// Lag that switches from `before` to `after` at time `at`.
pub fn regime_switch(at: f64, before: f64, after: f64) -> impl Fn(f64) -> f64 {
    move |t| if t < at { before } else { after }
}
