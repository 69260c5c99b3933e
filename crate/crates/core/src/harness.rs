//! Experiment drivers: the MAE convergence benchmark and the Monte Carlo check
//! of the closed-form expectation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ds_estimate, hry_estimate};
use crate::error::{Error, Result};
use crate::naples::{naples_profile, naples_r_full, LagGrid, LagProfile, Method};
use crate::sim::{gbm_pair, sample_grids, sample_times, GbmPairConfig, SamplingLaw};
use crate::theory::{expected_r_equispaced, expected_r_pairwise, EquispacedModel};
use crate::ticks::{TickSeries, TieRule};

/// The splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of group `group` (a horizon or an oracle cell).
pub fn trial_seed(base: u64, group: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(group)) ^ trial)
}

/// Runs one estimator and returns its profile.
pub fn run_estimator(
    method: Method,
    x: &TickSeries,
    y: &TickSeries,
    grid: &LagGrid,
    ds_delta: f64,
) -> Result<LagProfile> {
    match method {
        Method::Naples => Ok(naples_profile(x, y, grid)),
        Method::Hry => Ok(hry_estimate(x, y, grid)),
        Method::Ds => ds_estimate(x, y, ds_delta, grid),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub horizons: Vec<f64>,
    pub trials: usize,
    pub estimators: Vec<Method>,
    pub grid: LagGrid,
    /// Template; `horizon` and `seed` are overwritten per trial.
    pub sim: GbmPairConfig,
    pub sampling: SamplingLaw,
    pub ds_delta: f64,
    pub seed: u64,
}

impl ConvergenceConfig {
    /// 100 trials per horizon, `T ∈ {10^2.5, 10^3, 10^3.5, 10^4}`.
    pub fn desk_scale() -> Self {
        Self {
            horizons: vec![10f64.powf(2.5), 1e3, 10f64.powf(3.5), 1e4],
            trials: 100,
            estimators: vec![Method::Naples, Method::Hry],
            grid: LagGrid::from_range(-100.0, 100.0, 1.0).expect("static grid"),
            sim: GbmPairConfig::default(),
            sampling: SamplingLaw::default(),
            ds_delta: 1.0,
            seed: 2024,
        }
    }

    /// 1000 trials per horizon up to `T = 10^5`.
    pub fn full_scale() -> Self {
        Self {
            horizons: (5..=10).map(|k| 10f64.powf(k as f64 / 2.0)).collect(),
            trials: 1000,
            ..Self::desk_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.horizons.is_empty()
            || self.horizons.iter().any(|h| !(*h > 0.0) || !h.is_finite())
            || self.horizons.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::InvalidConfig(
                "horizons must be positive and increasing".into(),
            ));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators selected".into()));
        }
        SamplingLaw::new(self.sampling.mean, self.sampling.sd)?;
        GbmPairConfig {
            horizon: self.horizons[0],
            ..self.sim
        }
        .validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub estimator: Method,
    pub horizon: f64,
    pub trials: usize,
    pub mae: f64,
    /// Standard error of the MAE: sample sd of `|θ̂ − θ|` over `√n`.
    pub se: f64,
    pub mean_wall_seconds: f64,
    pub theta_hats: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub theta: f64,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn row(&self, estimator: Method, horizon: f64) -> Option<&ConvergenceRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.horizon == horizon)
    }

    /// The report with wall times zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.mean_wall_seconds = 0.0;
        }
        out
    }
}

/// Mean and its standard error, summed in index order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct TrialOutcome {
    theta_hats: Vec<f64>,
    seconds: Vec<f64>,
}

fn run_trial(cfg: &ConvergenceConfig, horizon: f64, seed: u64) -> Result<TrialOutcome> {
    let (s, t) = sample_grids(cfg.sampling, horizon, seed)?;
    let sim = GbmPairConfig {
        horizon,
        seed,
        ..cfg.sim
    };
    let (x, y) = gbm_pair(&sim, &s, &t)?;
    let mut theta_hats = Vec::with_capacity(cfg.estimators.len());
    let mut seconds = Vec::with_capacity(cfg.estimators.len());
    for &method in &cfg.estimators {
        let start = Instant::now();
        let profile = run_estimator(method, &x, &y, &cfg.grid, cfg.ds_delta)?;
        seconds.push(start.elapsed().as_secs_f64());
        theta_hats.push(profile.best_lag);
    }
    Ok(TrialOutcome {
        theta_hats,
        seconds,
    })
}

/// Mean absolute lag error per estimator and horizon. Trials run in parallel;
/// results are gathered by trial index so the report is independent of
/// scheduling, apart from wall times.
pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let theta = cfg.sim.theta;
    let mut rows = Vec::new();
    for (h, &horizon) in cfg.horizons.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                run_trial(cfg, horizon, trial_seed(cfg.seed, h as u64, trial as u64)).map_err(|e| {
                    Error::Trial {
                        trial,
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<_>>()?;
        for (k, &estimator) in cfg.estimators.iter().enumerate() {
            let theta_hats: Vec<f64> = outcomes.iter().map(|o| o.theta_hats[k]).collect();
            let errors: Vec<f64> = theta_hats.iter().map(|v| (v - theta).abs()).collect();
            let (mae, se) = mean_and_se(&errors);
            let mean_wall_seconds =
                outcomes.iter().map(|o| o.seconds[k]).sum::<f64>() / cfg.trials as f64;
            rows.push(ConvergenceRow {
                estimator,
                horizon,
                trials: cfg.trials,
                mae,
                se,
                mean_wall_seconds,
                theta_hats,
            });
        }
    }
    Ok(ConvergenceReport {
        theta,
        seed: cfg.seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
    pub delta: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub sigma: f64,
    /// Tie rule used for the simulated `R`; identical lattices tie every tick.
    pub rule: TieRule,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            rhos: vec![0.5, 0.9],
            thetas: vec![
                0.0, 2.5, -2.5, 5.0, -5.0, 10.0, -10.0, 15.0, -15.0, 25.0, -25.0,
            ],
            delta: 10.0,
            horizon: 1e4,
            paths: 2000,
            seed: 7,
            sigma: 0.001,
            rule: TieRule::Inclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCell {
    pub rho: f64,
    pub theta: f64,
    /// Scale count from counting the sign pairs that overlap at this lag.
    pub l: u64,
    /// Closed-form equispaced value.
    pub analytic: f64,
    /// Exact pairwise expectation on the same grid and tie rule.
    pub exact: f64,
    pub empirical_mean: f64,
    pub se: f64,
    pub z: f64,
}

pub fn z_score(mean: f64, target: f64, se: f64) -> f64 {
    let d = mean - target;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

/// Simulated mean of `R(T)` against the closed form on equispaced grids.
pub fn run_oracle_suite(cfg: &OracleConfig) -> Result<Vec<OracleCell>> {
    if cfg.paths == 0 || cfg.rhos.is_empty() || cfg.thetas.is_empty() {
        return Err(Error::InvalidConfig(
            "oracle needs paths, rhos and thetas".into(),
        ));
    }
    let lattice = sample_times(SamplingLaw::new(cfg.delta, 0.0)?, cfg.horizon, 0)?;
    let cells: Vec<(f64, f64)> = cfg
        .rhos
        .iter()
        .flat_map(|&rho| cfg.thetas.iter().map(move |&theta| (rho, theta)))
        .collect();

    cells
        .iter()
        .enumerate()
        .map(|(c, &(rho, theta))| {
            let pairs = expected_r_pairwise(&lattice, &lattice, rho, theta, cfg.rule)?;
            let l = pairs.implied_l().max(1);
            let analytic = expected_r_equispaced(&EquispacedModel::new(rho, theta, cfg.delta, l)?)?;
            let sim = GbmPairConfig {
                rho,
                theta,
                sigma1: cfg.sigma,
                sigma2: cfg.sigma,
                horizon: cfg.horizon,
                ..GbmPairConfig::default()
            };
            let draws: Vec<f64> = (0..cfg.paths)
                .into_par_iter()
                .map(|p| {
                    let seed = trial_seed(cfg.seed, c as u64, p as u64);
                    let (x, y) = gbm_pair(&GbmPairConfig { seed, ..sim }, &lattice, &lattice)
                        .map_err(|e| Error::Trial {
                            trial: p,
                            source: Box::new(e),
                        })?;
                    Ok(naples_r_full(&x, &y, cfg.rule) as f64)
                })
                .collect::<Result<_>>()?;
            let (mean, se) = mean_and_se(&draws);
            Ok(OracleCell {
                rho,
                theta,
                l,
                analytic,
                exact: pairs.value,
                empirical_mean: mean,
                se,
                z: z_score(mean, analytic, se),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ConvergenceConfig {
        ConvergenceConfig {
            horizons: vec![300.0, 1000.0],
            trials: 6,
            estimators: vec![Method::Naples, Method::Hry, Method::Ds],
            grid: LagGrid::from_range(-30.0, 30.0, 1.0).unwrap(),
            ..ConvergenceConfig::desk_scale()
        }
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for g in 0..20 {
            for t in 0..200 {
                assert!(seen.insert(trial_seed(1, g, t)));
            }
        }
        assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
    }

    #[test]
    fn convergence_report_shape() {
        let report = run_convergence(&small()).unwrap();
        assert_eq!(report.rows.len(), 6);
        for row in &report.rows {
            assert!(row.mae >= 0.0 && row.se >= 0.0);
            assert_eq!(row.theta_hats.len(), 6);
        }
        assert!(report.row(Method::Ds, 1000.0).is_some());
    }

    #[test]
    fn convergence_is_deterministic() {
        let a = run_convergence(&small()).unwrap();
        let b = run_convergence(&small()).unwrap();
        assert_eq!(a.without_timings(), b.without_timings());
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = single.install(|| run_convergence(&small())).unwrap();
        assert_eq!(a.without_timings(), c.without_timings());
    }

    #[test]
    fn convergence_rejects_bad_configs() {
        let mut cfg = small();
        cfg.trials = 0;
        assert!(run_convergence(&cfg).is_err());
        let mut cfg = small();
        cfg.horizons = vec![1000.0, 300.0];
        assert!(run_convergence(&cfg).is_err());
    }

    #[test]
    fn failed_trial_reports_index() {
        let mut cfg = small();
        cfg.estimators = vec![Method::Ds];
        cfg.ds_delta = 0.0;
        match run_convergence(&cfg) {
            Err(Error::Trial { trial: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn near_deterministic_instance() {
        // Both clocks are the same unit lattice. Lags are offset by half a step:
        // an integer lag lays one clock exactly on the other, where R vanishes.
        let cfg = ConvergenceConfig {
            horizons: vec![2000.0],
            trials: 1,
            estimators: vec![Method::Naples],
            grid: LagGrid::from_range(-20.5, 20.5, 1.0).unwrap(),
            sim: GbmPairConfig {
                rho: 1.0,
                theta: 10.0,
                ..GbmPairConfig::default()
            },
            sampling: SamplingLaw::new(1.0, 0.0).unwrap(),
            ..ConvergenceConfig::desk_scale()
        };
        let report = run_convergence(&cfg).unwrap();
        let hat = report.rows[0].theta_hats[0];
        assert!((hat - 10.0).abs() <= 1.0, "theta_hat {hat}");
    }

    #[test]
    fn oracle_zero_correlation_cell() {
        let cfg = OracleConfig {
            rhos: vec![0.0],
            thetas: vec![5.0],
            horizon: 1000.0,
            paths: 400,
            ..OracleConfig::default()
        };
        let cells = run_oracle_suite(&cfg).unwrap();
        assert_eq!(cells[0].analytic, 0.0);
        assert!(cells[0].z.abs() <= 3.0, "{:?}", cells[0]);
    }

    #[test]
    fn oracle_first_branch_cell() {
        let cfg = OracleConfig {
            rhos: vec![0.9],
            thetas: vec![5.0, 30.0],
            horizon: 1000.0,
            paths: 2000,
            ..OracleConfig::default()
        };
        let cells = run_oracle_suite(&cfg).unwrap();
        let first = &cells[0];
        let want = first.l as f64 / std::f64::consts::PI * 0.45f64.asin();
        assert!((first.analytic - want).abs() < 1e-12);
        assert!((first.exact - first.analytic).abs() < 1e-9);
        assert!(first.z.abs() <= 3.0, "{first:?}");
        assert_eq!(cells[1].analytic, 0.0);
        assert!(cells[1].z.abs() <= 3.0, "{:?}", cells[1]);
    }

    #[test]
    fn z_score_edges() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(2.0, 1.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(2.0, 1.0, 0.5), 2.0);
    }
}
