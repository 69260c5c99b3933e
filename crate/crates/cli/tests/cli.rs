use std::path::Path;
use std::process::{Command, Output};

fn naples(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naples"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn simulate(dir: &Path, seed: &str) {
    let out = naples(&[
        "simulate",
        "--seed",
        seed,
        "--horizon",
        "3000",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_writes_tick_files() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "5");
    let x = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert!(x.starts_with("timestamp,price\n0,"));
    assert!(dir.path().join("y.csv").exists());
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    simulate(a.path(), "9");
    simulate(b.path(), "9");
    for name in ["x.csv", "y.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn estimate_prints_lag_and_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "1");
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    let profile = dir.path().join("profile.csv");
    let out = naples(&[
        "estimate",
        "--x",
        x.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
        "--grid",
        "-100:100:1",
        "--method",
        "naples",
        "--out",
        profile.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let hat: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("theta_hat="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((-100.0..=100.0).contains(&hat));
    assert!(text.contains("theta_min="));
    let csv = std::fs::read_to_string(profile).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,value"));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn hry_recovers_the_simulated_lead() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "2");
    let out = naples(&[
        "estimate",
        "--x",
        dir.path().join("x.csv").to_str().unwrap(),
        "--y",
        dir.path().join("y.csv").to_str().unwrap(),
        "--method",
        "hry",
    ]);
    let hat: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("theta_hat="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((hat - 10.0).abs() <= 3.0, "{hat}");
}

#[test]
fn profile_json() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "3");
    let out = naples(&[
        "profile",
        "--x",
        dir.path().join("x.csv").to_str().unwrap(),
        "--y",
        dir.path().join("y.csv").to_str().unwrap(),
        "--grid",
        "-5:5:1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"method\": \"naples\""));
    assert!(text.contains("\"best_lag\""));
}

#[test]
fn expected_curve_shape() {
    let out = naples(&[
        "expected",
        "--rho",
        "0.9",
        "--delta",
        "10",
        "--l",
        "100",
        "--range",
        "-40:40:0.5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,expected_r"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 161);
    let best = rows
        .iter()
        .cloned()
        .fold((0.0, f64::MIN), |a, r| if r.1 > a.1 { r } else { a });
    assert_eq!(best.0, 10.0);
    for (k, &(theta, v)) in rows.iter().enumerate() {
        assert_eq!(v, -rows[rows.len() - 1 - k].1);
        if theta.abs() >= 20.0 {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn rolling_has_one_row_per_window() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "4");
    let out = naples(&[
        "rolling",
        "--x",
        dir.path().join("x.csv").to_str().unwrap(),
        "--y",
        dir.path().join("y.csv").to_str().unwrap(),
        "--window",
        "1000",
        "--step",
        "500",
        "--grid",
        "-20:20:1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("window_end,theta_hat,value"));
    // ends at 1000, 1500, ..., 3000
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn convergence_and_oracle_reports() {
    let out = naples(&[
        "bench-convergence",
        "--trials",
        "2",
        "--horizons",
        "300",
        "--grid",
        "-20:20:1",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"mae\""));
    let out = naples(&[
        "oracle",
        "--paths",
        "20",
        "--horizon",
        "200",
        "--rhos",
        "0.5",
        "--thetas",
        "5",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("rho,theta,l,analytic,exact,empirical_mean,se,z\n"));
}

#[test]
fn usage_errors_exit_one_with_help() {
    let out = naples(&["estimate", "--x", "a.csv", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().next().unwrap().starts_with("error:"));
    assert!(err.contains("Usage: naples estimate"));

    let out = naples(&["estimate", "--x", "missing.csv", "--y", "missing.csv"]);
    assert_eq!(out.status.code(), Some(1));

    let out = naples(&[
        "expected", "--rho", "0.5", "--delta", "0", "--range", "0:1:1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = naples(&[
        "expected", "--rho", "0.5", "--delta", "1", "--range", "oops",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "timestamp,price\n0,1\n1,2\n2,abc\n").unwrap();
    let out = naples(&[
        "estimate",
        "--x",
        bad.to_str().unwrap(),
        "--y",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn help_exits_zero() {
    assert!(naples(&["--help"]).status.success());
    assert!(naples(&["estimate", "--help"]).status.success());
}
