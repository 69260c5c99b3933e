//! `naples` command-line tool.
//!
//! Exit status: 0 on success, 1 on user error (bad flags, unreadable or
//! invalid input), 2 on internal error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use naples_core::baselines::hry_estimate;
use naples_core::harness::{
    run_convergence, run_estimator, run_oracle_suite, ConvergenceConfig, OracleConfig,
};
use naples_core::io::{
    create_file, write_curve_csv, write_json, write_profile_csv, write_rolling_csv,
};
use naples_core::naples::{naples_profile, rolling_estimate_by, LagGrid, LagProfile, Method};
use naples_core::sim::{sample_grids, GbmPairConfig, SamplingLaw};
use naples_core::theory::{expected_curve, EquispacedModel};
use naples_core::ticks::{read_ticks_csv, write_ticks_csv, TickSeries, TimeFormat};
use naples_core::{gbm_pair, Error};

#[derive(Debug, Parser)]
#[command(name = "naples", version, about = "Lead-lag estimation for tick data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted, a directory for `simulate`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct Pair {
    /// Tick CSV of the candidate leader.
    #[arg(long)]
    x: PathBuf,
    /// Tick CSV of the candidate follower.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = "seconds")]
    time_format: TimeFormat,
}

#[derive(Debug, Args)]
struct Estimation {
    /// Candidate lags as `start:stop:step` (inclusive) or a single value.
    #[arg(long, default_value = "-100:100:1", allow_hyphen_values = true)]
    grid: LagGrid,
    #[arg(long, default_value = "naples")]
    method: Method,
    /// Slot width for the DS estimator, in seconds.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a lagged GBM pair; writes x.csv and y.csv into --out.
    Simulate {
        #[arg(long, default_value_t = 1e4)]
        horizon: f64,
        #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.001)]
        sigma1: f64,
        #[arg(long, default_value_t = 0.001)]
        sigma2: f64,
        #[arg(long, default_value_t = 100.0)]
        x0: f64,
        #[arg(long, default_value_t = 100.0)]
        y0: f64,
        /// Mean gap between ticks, in seconds.
        #[arg(long, default_value_t = 10.0)]
        gap_mean: f64,
        #[arg(long, default_value_t = 2.0)]
        gap_sd: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the lead-lag; prints theta_hat and writes the profile to --out.
    Estimate {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        est: Estimation,
        #[command(flatten)]
        common: Common,
    },
    /// Print the full contrast profile over the lag grid.
    Profile {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        est: Estimation,
        #[command(flatten)]
        common: Common,
    },
    /// Lead-lag estimates over sliding windows.
    Rolling {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        est: Estimation,
        /// Window length in seconds.
        #[arg(long)]
        window: f64,
        /// Distance between consecutive window ends, in seconds.
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// MAE of the estimators against the true lag over simulated trials.
    BenchConvergence {
        /// Comma-separated horizons; defaults to the desk-scale set.
        #[arg(long, value_delimiter = ',')]
        horizons: Vec<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "naples,hry")]
        estimators: Vec<Method>,
        #[arg(long, default_value = "-100:100:1", allow_hyphen_values = true)]
        grid: LagGrid,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
        rho: f64,
        /// 1000 trials up to T = 1e5 instead of the desk-scale defaults.
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Simulated mean of R on equispaced grids against the closed form.
    Oracle {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.5,0.9",
            allow_hyphen_values = true
        )]
        rhos: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,2.5,-2.5,5,-5,10,-10,15,-15,25,-25",
            allow_hyphen_values = true
        )]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        delta: f64,
        #[arg(long, default_value_t = 1e4)]
        horizon: f64,
        #[arg(long, default_value_t = 2000)]
        paths: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the closed-form expected index over a range of lags.
    Expected {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        l: u64,
        /// `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    User(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Serialize(_) | Error::Trial { .. } => Failure::Internal(e.to_string()),
            _ => Failure::User(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => Ok(Box::new(create_file(p)?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn load(pair: &Pair) -> Result<(TickSeries, TickSeries), Failure> {
    Ok((
        read_ticks_csv(&pair.x, pair.time_format)?,
        read_ticks_csv(&pair.y, pair.time_format)?,
    ))
}

fn write_profile(profile: &LagProfile, format: Format, out: Option<&Path>) -> Outcome {
    let w = output(out)?;
    match format {
        Format::Csv => write_profile_csv(&profile.lags, &profile.values, w)?,
        Format::Json => write_json(profile, w)?,
    }
    Ok(())
}

fn profile_for(pair: &Pair, est: &Estimation) -> Result<LagProfile, Failure> {
    let (x, y) = load(pair)?;
    Ok(run_estimator(est.method, &x, &y, &est.grid, est.delta)?)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Simulate {
            horizon,
            rho,
            theta,
            sigma1,
            sigma2,
            x0,
            y0,
            gap_mean,
            gap_sd,
            common,
        } => {
            let law = SamplingLaw::new(gap_mean, gap_sd)?;
            let cfg = GbmPairConfig {
                x0,
                y0,
                sigma1,
                sigma2,
                rho,
                theta,
                horizon,
                seed: common.seed,
            };
            let (s, t) = sample_grids(law, horizon, common.seed)?;
            let (x, y) = gbm_pair(&cfg, &s, &t)?;
            let dir = common.out.unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            for (series, name) in [(&x, "x.csv"), (&y, "y.csv")] {
                let path = dir.join(name);
                write_ticks_csv(series, create_file(&path)?)
                    .map_err(|e| Failure::User(format!("{}: {e}", path.display())))?;
            }
            println!(
                "wrote {} and {} ticks to {}",
                x.len(),
                y.len(),
                dir.display()
            );
            Ok(())
        }
        Command::Estimate { pair, est, common } => {
            let profile = profile_for(&pair, &est)?;
            println!("theta_hat={}", profile.best_lag);
            println!("theta_min={}", profile.min_lag());
            println!("value={}", profile.best_value);
            for w in &profile.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(out) = common.out.as_deref() {
                write_profile(&profile, common.format.unwrap_or(Format::Csv), Some(out))?;
            }
            Ok(())
        }
        Command::Profile { pair, est, common } => {
            let profile = profile_for(&pair, &est)?;
            write_profile(
                &profile,
                common.format.unwrap_or(Format::Csv),
                common.out.as_deref(),
            )
        }
        Command::Rolling {
            pair,
            est,
            window,
            step,
            common,
        } => {
            let (x, y) = load(&pair)?;
            let grid = &est.grid;
            let rolled = match est.method {
                Method::Naples => {
                    rolling_estimate_by(&x, &y, window, step, |a, b| naples_profile(a, b, grid))?
                }
                Method::Hry => {
                    rolling_estimate_by(&x, &y, window, step, |a, b| hry_estimate(a, b, grid))?
                }
                Method::Ds => {
                    return Err(Failure::User(
                        "rolling supports --method naples or hry".into(),
                    ));
                }
            };
            let w = output(common.out.as_deref())?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => write_rolling_csv(&rolled, w)?,
                Format::Json => write_json(&rolled, w)?,
            }
            Ok(())
        }
        Command::BenchConvergence {
            horizons,
            trials,
            estimators,
            grid,
            theta,
            rho,
            full_scale,
            common,
        } => {
            let mut cfg = if full_scale {
                ConvergenceConfig::full_scale()
            } else {
                ConvergenceConfig::desk_scale()
            };
            if !horizons.is_empty() {
                cfg.horizons = horizons;
            }
            if let Some(n) = trials {
                cfg.trials = n;
            }
            cfg.estimators = estimators;
            cfg.grid = grid;
            cfg.sim.theta = theta;
            cfg.sim.rho = rho;
            cfg.seed = common.seed;
            let report = run_convergence(&cfg)?;
            let mut w = output(common.out.as_deref())?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&report, w)?,
                Format::Csv => {
                    let mut text =
                        String::from("estimator,horizon,trials,mae,se,mean_wall_seconds\n");
                    for r in &report.rows {
                        text += &format!(
                            "{},{},{},{},{},{}\n",
                            r.estimator, r.horizon, r.trials, r.mae, r.se, r.mean_wall_seconds
                        );
                    }
                    w.write_all(text.as_bytes())
                        .map_err(|e| Failure::User(e.to_string()))?;
                }
            }
            Ok(())
        }
        Command::Oracle {
            rhos,
            thetas,
            delta,
            horizon,
            paths,
            common,
        } => {
            let cfg = OracleConfig {
                rhos,
                thetas,
                delta,
                horizon,
                paths,
                seed: common.seed,
                ..OracleConfig::default()
            };
            let cells = run_oracle_suite(&cfg)?;
            let mut w = output(common.out.as_deref())?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&cells, w)?,
                Format::Csv => {
                    let mut text = String::from("rho,theta,l,analytic,exact,empirical_mean,se,z\n");
                    for c in &cells {
                        text += &format!(
                            "{},{},{},{},{},{},{},{}\n",
                            c.rho, c.theta, c.l, c.analytic, c.exact, c.empirical_mean, c.se, c.z
                        );
                    }
                    w.write_all(text.as_bytes())
                        .map_err(|e| Failure::User(e.to_string()))?;
                }
            }
            Ok(())
        }
        Command::Expected {
            rho,
            delta,
            l,
            range,
            common,
        } => {
            let bad = || {
                Failure::User(format!(
                    "invalid --range `{range}` (expected start:stop:step)"
                ))
            };
            let parts: Vec<f64> = range
                .split(':')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let [lo, hi, step] = parts[..] else {
                return Err(bad());
            };
            let model = EquispacedModel::new(rho, 0.0, delta, l)?;
            let curve = expected_curve(&model, lo, hi, step)?;
            let w = output(common.out.as_deref())?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => write_curve_csv(&curve, w)?,
                Format::Json => write_json(&curve, w)?,
            }
            Ok(())
        }
    }
}

/// The subcommand named on the command line, if any.
fn subcommand_in(args: &[String]) -> Option<String> {
    let cmd = Cli::command();
    args.iter()
        .skip(1)
        .find(|a| cmd.get_subcommands().any(|s| s.get_name() == a.as_str()))
        .cloned()
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let line = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            let mut cmd = Cli::command();
            cmd.build();
            let help = match subcommand_in(&args) {
                Some(name) => cmd.find_subcommand_mut(&name).map(|s| s.render_help()),
                None => Some(cmd.render_help()),
            };
            if let Some(help) = help {
                eprintln!("\n{help}");
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
