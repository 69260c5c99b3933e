//! Lead-lag estimation for non-synchronously observed tick series.
//!
//! The central quantity is the NAPLES index `R`, a signed count of how often
//! the sign of one series' return is followed by the same sign in the other.
//! Reference estimators (Hayashi–Yoshida, HRY, DS), the closed-form expectation
//! under a lagged Brownian model, a simulator and experiment drivers live
//! alongside it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod io;
pub mod naples;
pub mod sim;
pub mod theory;
pub mod ticks;

pub use baselines::{
    ds_estimate, ds_index, hry_contrast, hry_estimate, hy_covariance, ActivityGrid,
};
pub use error::{Error, Result};
pub use harness::{
    run_convergence, run_oracle_suite, ConvergenceConfig, ConvergenceReport, ConvergenceRow,
    OracleCell, OracleConfig,
};
pub use naples::{
    estimate_lag, naples_profile, naples_profile_with, naples_r, naples_r_full, naples_r_int,
    naples_r_with, rolling_estimate, rolling_estimate_by, LagGrid, LagProfile, Method,
    RollingEstimate,
};
pub use sim::{
    gbm_pair, gbm_pair_with_lag, sample_grids, sample_times, GbmPairConfig, SamplingLaw,
};
pub use theory::{
    expected_curve, expected_r_equispaced, expected_r_general, expected_r_pairwise,
    orthant_probability, EquispacedModel, GridModel, PairwiseExpectation,
};
pub use ticks::{read_ticks_csv, write_ticks_csv, SignPath, TickSeries, TieRule, TimeFormat};
