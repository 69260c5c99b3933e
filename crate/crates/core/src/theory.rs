//! Analytic expectation of the NAPLES index under a lead-lag Brownian model.
//!
//! Two routes are provided. [`expected_r_equispaced`] is the closed-form
//! piecewise arcsin curve for equally spaced observations. [`expected_r_pairwise`]
//! sums the exact expectation of every sign product that enters `R`, on
//! arbitrary grids. For sign pairs of Gaussian increments with correlation `c`,
//! `E[b·b'] = 4·P(both > 0) − 1 = (2/π)·arcsin(c)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ticks::TieRule;

const ARCSIN_GUARD: f64 = 1e-12;

/// `arcsin` that clamps arguments within `1e−12` of `±1` and rejects the rest.
pub fn guarded_asin(x: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x.asin())
    } else if x.abs() <= 1.0 + ARCSIN_GUARD {
        Ok(x.signum() * PI / 2.0)
    } else {
        Err(Error::Domain(x))
    }
}

/// `P(N > 0, M > 0)` for standard bivariate normals with correlation `rho`.
pub fn orthant_probability(rho: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::Domain(rho));
    }
    Ok(0.25 + rho.asin() / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquispacedModel {
    pub rho: f64,
    pub theta: f64,
    pub delta: f64,
    /// Scale count: twice the number of contributing sign pairs.
    pub l: u64,
}

impl EquispacedModel {
    pub fn new(rho: f64, theta: f64, delta: f64, l: u64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "|rho| must be <= 1, got {rho}"
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidModel(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidModel(format!(
                "theta must be finite, got {theta}"
            )));
        }
        if l == 0 {
            return Err(Error::InvalidModel("l must be at least 1".into()));
        }
        Ok(Self {
            rho,
            theta,
            delta,
            l,
        })
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

/// `E[R(T)]` for equally spaced observations:
///
/// ```text
/// (l/π) sign(θ) arcsin(ρ|θ|/Δ)        0 < |θ| < Δ
/// (l/π) sign(θ) arcsin(ρ(2Δ−|θ|)/Δ)   Δ < |θ| < 2Δ
/// 0                                   otherwise
/// ```
///
/// At `|θ| = Δ` both branches give `arcsin(ρ)`; at `|θ| = 2Δ` the value is 0.
pub fn expected_r_equispaced(m: &EquispacedModel) -> Result<f64> {
    let a = m.theta.abs();
    let arg = if a == 0.0 || a >= 2.0 * m.delta {
        return Ok(0.0);
    } else if a <= m.delta {
        m.rho * a / m.delta
    } else {
        m.rho * (2.0 * m.delta - a) / m.delta
    };
    let magnitude = m.l as f64 / PI * guarded_asin(arg)?;
    Ok(if m.theta > 0.0 { magnitude } else { -magnitude })
}

/// Tabulates the equispaced curve at `lo, lo+step, …` up to `hi`.
pub fn expected_curve(m: &EquispacedModel, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidModel(format!("bad range {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            let theta = lo + k as f64 * step;
            expected_r_equispaced(&m.with_theta(theta)).map(|v| (theta, v))
        })
        .collect()
}

/// Exact `E[R]` summed over sign pairs, with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseExpectation {
    pub value: f64,
    /// Pairs from the `X`-leads sum whose intervals overlap after the lag.
    pub lead_pairs: usize,
    /// Pairs from the `Y`-leads sum whose intervals overlap after the lag.
    pub follow_pairs: usize,
}

impl PairwiseExpectation {
    pub fn contributing_pairs(&self) -> usize {
        self.lead_pairs + self.follow_pairs
    }

    /// The `l` under which the equispaced formula reproduces this expectation.
    pub fn implied_l(&self) -> u64 {
        2 * self.contributing_pairs() as u64
    }
}

/// Correlation between the `X` increment on `(a0, a1]` and the `Y` increment on
/// `(b0, b1]` when `Y_t` carries the driving noise of `X` at `t − θ`.
/// `None` when the two intervals do not overlap after the lag.
fn increment_correlation(rho: f64, a0: f64, a1: f64, b0: f64, b1: f64, theta: f64) -> Option<f64> {
    let overlap = a1.min(b1 - theta) - a0.max(b0 - theta);
    (overlap > 0.0).then(|| rho * overlap / ((a1 - a0) * (b1 - b0)).sqrt())
}

/// Half-open tick window following a lead tick, per the tie rule.
fn window(times: &[f64], lo: f64, hi: f64, rule: TieRule) -> std::ops::Range<usize> {
    match rule {
        TieRule::Strict => times.partition_point(|&u| u < lo)..times.partition_point(|&u| u < hi),
        TieRule::Inclusive => {
            times.partition_point(|&u| u <= lo)..times.partition_point(|&u| u <= hi)
        }
    }
}

/// One side of `R`: `Σ_k b^lead_k (F̂(u_{k+1}) − F̂(u_k))` in expectation. The
/// closure maps `(lead interval, follow interval)` to their correlation.
fn side<F>(lead: &[f64], follow: &[f64], rule: TieRule, corr: F) -> Result<(f64, usize)>
where
    F: Fn((f64, f64), (f64, f64)) -> Option<f64>,
{
    let mut sum = 0.0;
    let mut pairs = 0;
    // Lead ticks k >= 1 carry a sign and need a following tick k+1.
    for k in 1..lead.len().saturating_sub(1) {
        for j in window(follow, lead[k], lead[k + 1], rule) {
            if j == 0 {
                continue;
            }
            if let Some(c) = corr((lead[k - 1], lead[k]), (follow[j - 1], follow[j])) {
                sum += 2.0 / PI * guarded_asin(c)?;
                pairs += 1;
            }
        }
    }
    Ok((sum, pairs))
}

/// Exact `E[R]` over the full sample for `X` observed at `s` and `Y` at `t`,
/// where `Y`'s log price is driven by `X`'s Brownian motion delayed by `theta`.
pub fn expected_r_pairwise(
    s: &[f64],
    t: &[f64],
    rho: f64,
    theta: f64,
    rule: TieRule,
) -> Result<PairwiseExpectation> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidModel(format!(
            "|rho| must be <= 1, got {rho}"
        )));
    }
    let (lead, lead_pairs) = side(s, t, rule, |(a0, a1), (b0, b1)| {
        increment_correlation(rho, a0, a1, b0, b1, theta)
    })?;
    let (follow, follow_pairs) = side(t, s, rule, |(b0, b1), (a0, a1)| {
        increment_correlation(rho, a0, a1, b0, b1, theta)
    })?;
    Ok(PairwiseExpectation {
        value: lead - follow,
        lead_pairs,
        follow_pairs,
    })
}

/// Two non-synchronous grids in which neither series ticks twice between
/// consecutive ticks of the other.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    s_times: Vec<f64>,
    t_times: Vec<f64>,
    pub rho: f64,
    pub theta: f64,
    pub rule: TieRule,
}

impl GridModel {
    pub fn new(s_times: Vec<f64>, t_times: Vec<f64>, rho: f64, theta: f64) -> Result<Self> {
        for (series, times) in [("s", &s_times), ("t", &t_times)] {
            if times.len() < 2 {
                return Err(Error::InvalidModel(format!("{series} grid needs 2 points")));
            }
            if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidModel(format!(
                    "{series} grid not strictly increasing at index {}",
                    k + 1
                )));
            }
        }
        if !(rho.abs() <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "|rho| must be <= 1, got {rho}"
            )));
        }
        check_interleaving("s", &s_times, &t_times)?;
        check_interleaving("t", &t_times, &s_times)?;
        Ok(Self {
            s_times,
            t_times,
            rho,
            theta,
            rule: TieRule::Strict,
        })
    }

    pub fn with_rule(mut self, rule: TieRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn s_times(&self) -> &[f64] {
        &self.s_times
    }

    pub fn t_times(&self) -> &[f64] {
        &self.t_times
    }
}

fn check_interleaving(series: &'static str, own: &[f64], other: &[f64]) -> Result<()> {
    for (index, w) in own.windows(2).enumerate() {
        let lo = other.partition_point(|&u| u <= w[0]);
        let hi = other.partition_point(|&u| u < w[1]);
        if hi > lo + 1 {
            return Err(Error::InterleavingViolation { series, index });
        }
    }
    Ok(())
}

/// `E[R(T)]` on an interleaved pair of grids.
pub fn expected_r_general(g: &GridModel) -> Result<f64> {
    Ok(expected_r_pairwise(&g.s_times, &g.t_times, g.rho, g.theta, g.rule)?.value)
}
