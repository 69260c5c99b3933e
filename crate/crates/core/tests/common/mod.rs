//! Strategies and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use naples_core::ticks::{TickSeries, TieRule};
use proptest::prelude::*;

/// Tick series on a half-unit lattice, so that ties between two series are common.
pub fn lattice_series(max_len: usize) -> impl Strategy<Value = TickSeries> {
    (
        0u32..4,
        prop::collection::vec((1u32..5, -1i32..=1), 1..max_len),
    )
        .prop_map(|(start, steps)| {
            let mut times = vec![start as f64 * 0.5];
            let mut level = 0i32;
            let mut prices = vec![100.0];
            for (gap, step) in steps {
                times.push(times.last().unwrap() + gap as f64 * 0.5);
                level += step;
                prices.push(100.0 * 1.01f64.powi(level));
            }
            TickSeries::new(times, prices, "s").unwrap()
        })
}

/// Tick series on irregular real-valued clocks.
pub fn real_series(max_len: usize) -> impl Strategy<Value = TickSeries> {
    (
        0.0..5.0f64,
        prop::collection::vec((0.01..3.0f64, -0.05..0.05f64), 1..max_len),
    )
        .prop_map(|(start, steps)| {
            let mut times = vec![start];
            let mut prices = vec![50.0];
            for (gap, ret) in steps {
                times.push(times.last().unwrap() + gap);
                prices.push(prices.last().unwrap() * f64::exp(ret));
            }
            TickSeries::new(times, prices, "r").unwrap()
        })
}

pub fn tie_rule() -> impl Strategy<Value = TieRule> {
    prop_oneof![Just(TieRule::Strict), Just(TieRule::Inclusive)]
}

/// Evaluation horizon: a lattice point (often a tick time) or infinity.
pub fn horizon() -> impl Strategy<Value = f64> {
    prop_oneof![(0u32..40).prop_map(|k| k as f64 * 0.5), Just(f64::INFINITY)]
}

/// Literal double-loop transcription of the index. `b_1` has no predecessor and is 0.
pub fn naples_brute(x: &TickSeries, y: &TickSeries, t: f64, rule: TieRule) -> i64 {
    fn signs(z: &TickSeries) -> Vec<i64> {
        let p = z.prices();
        (0..p.len())
            .map(|k| {
                if k == 0 {
                    0
                } else {
                    let r = (p[k] / p[k - 1]).ln();
                    if r > 0.0 {
                        1
                    } else if r < 0.0 {
                        -1
                    } else {
                        0
                    }
                }
            })
            .collect()
    }
    fn hat(times: &[f64], b: &[i64], t: f64, rule: TieRule) -> i64 {
        let mut acc = 0;
        for k in 0..times.len() {
            let seen = match rule {
                TieRule::Strict => times[k] < t,
                TieRule::Inclusive => times[k] <= t,
            };
            if seen {
                acc += b[k];
            }
        }
        acc
    }
    let (s, bx) = (x.times(), signs(x));
    let (u, by) = (y.times(), signs(y));
    let mut first = 0;
    for i in 0..s.len() - 1 {
        if s[i + 1] < t {
            first += bx[i] * hat(u, &by, s[i + 1], rule) - bx[i] * hat(u, &by, s[i], rule);
        }
    }
    let mut second = 0;
    for j in 0..u.len() - 1 {
        if u[j + 1] < t {
            second += by[j] * hat(s, &bx, u[j + 1], rule) - by[j] * hat(s, &bx, u[j], rule);
        }
    }
    first - second
}

/// O(nm) Hayashi–Yoshida sum over every pair of overlapping intervals.
pub fn hy_brute(x: &TickSeries, y: &TickSeries) -> f64 {
    let (s, t) = (x.times(), y.times());
    let (rx, ry) = (x.log_returns(), y.log_returns());
    let mut acc = 0.0;
    for i in 0..s.len() - 1 {
        for j in 0..t.len() - 1 {
            if s[i].max(t[j]) < s[i + 1].min(t[j + 1]) {
                acc += rx[i] * ry[j];
            }
        }
    }
    acc
}
