use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use steadyprice_cli::{ErrorReport, RunReport};
use steadyprice_core::PriceFunction;

const COIN_TOSS: &str = "r_1,f,q,v\n1,0.5,1,3\n0,0.5,1,0\n";

fn steadyprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steadyprice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn report(out: &Output) -> RunReport {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error(out: &Output) -> ErrorReport {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn coin_toss_waterlevel_prices() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    let r = report(&steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
    ]));
    assert_eq!(r.prices, vec![2.0, 0.0]);
    match &r.price_function {
        PriceFunction::Tabulated(t) => assert_eq!(t.level, 1.0),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(r.report.variance, 0.25);
    assert!(r.warnings.is_empty());
    assert!(r.input_digest.starts_with("sha256:"));
}

#[test]
fn coin_toss_flat_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    let r = report(&steadyprice(&[
        "price",
        "--scheme",
        "flat",
        "--input",
        input.to_str().unwrap(),
    ]));
    assert_eq!(r.prices, vec![1.0, 1.0]);
    assert_eq!(r.report.variance, 2.25);
}

#[test]
fn json_input_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "coin.csv", COIN_TOSS);
    let json = write(
        dir.path(),
        "coin.json",
        r#"{"m": 1, "rows": [{"r": [1], "f": 0.5, "q": 1, "v": 3}, {"r": [0], "f": 0.5, "q": 1, "v": 0}]}"#,
    );
    let a = report(&steadyprice(&[
        "price",
        "--scheme",
        "linear",
        "--input",
        csv.to_str().unwrap(),
    ]));
    let b = report(&steadyprice(&[
        "price",
        "--scheme",
        "linear",
        "--input",
        json.to_str().unwrap(),
    ]));
    assert_eq!(a.price_function, b.price_function);
    assert_ne!(a.input_digest, b.input_digest);
}

#[test]
fn empty_csv_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", "");
    let out = steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let e = error(&out);
    assert_eq!(e.error, "ParseError");
    assert_eq!(e.line, Some(1));
}

#[test]
fn parse_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "r_1,f,q,v\n1,0.5,1,3\n0,0.5,x,0\n");
    let e = error(&steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
    ]));
    assert_eq!(e.error, "ParseError");
    assert_eq!((e.line, e.column), (Some(3), Some(3)));
}

#[test]
fn missing_file_is_reported() {
    let out = steadyprice(&[
        "price",
        "--scheme",
        "flat",
        "--input",
        "/nonexistent/coin.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error(&out).error, "FileNotFound");
}

#[test]
fn infeasible_table_fails_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "hard.csv", "r_1,f,q,v\n1,0.5,4,3\n0,0.5,4,0\n");
    let output = dir.path().join("report.json");
    let out = steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error(&out).error, "InfeasibleFairness");
    assert!(!output.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let r = report(&steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
        "--allow-negative-level",
    ]));
    assert_eq!(r.warnings.len(), 1);
    assert!(r.report.min_profit < 0.0);
}

#[test]
fn verify_coin_toss_passes_for_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    for scheme in ["waterlevel", "linear", "flat"] {
        let r = report(&steadyprice(&[
            "verify",
            "--scheme",
            scheme,
            "--input",
            input.to_str().unwrap(),
        ]));
        let v = r.verification.unwrap();
        assert!(v.passed, "{scheme}: {:?}", v.checks);
    }
}

#[test]
fn verify_linear_agrees_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    let r = report(&steadyprice(&[
        "verify",
        "--scheme",
        "linear",
        "--input",
        input.to_str().unwrap(),
    ]));
    assert!((r.report.variance - 0.25).abs() <= 1e-6);
    let check = r
        .verification
        .unwrap()
        .checks
        .into_iter()
        .find(|c| c.name == "variance_vs_oracle")
        .unwrap();
    assert!(check.measured.abs() <= 1e-6);
}

#[test]
fn verify_rejects_large_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("r_1,f,q,v\n");
    for k in 0..7 {
        text.push_str(&format!("{k},{},1,3\n", 1.0 / 7.0));
    }
    let input = write(dir.path(), "seven.csv", &text);
    let out = steadyprice(&[
        "verify",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(6));
    let e = error(&out);
    assert_eq!(e.error, "TooLarge");
    assert!(e.message.contains("shrink"));
}

#[test]
fn estimate_writes_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "history.csv", "r_1,r_2\n1,2\n1,2\n0,5\n1,2\n");
    let out = steadyprice(&["estimate", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "r_1,r_2,f\n1,2,0.75\n0,5,0.25\n"
    );

    let empty = write(dir.path(), "empty.csv", "r_1,r_2\n");
    assert_eq!(
        error(&steadyprice(&[
            "estimate",
            "--input",
            empty.to_str().unwrap()
        ]))
        .error,
        "EmptyHistory"
    );
}

#[test]
fn simulate_reports_ruin() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    let run = |scheme: &str| {
        report(&steadyprice(&[
            "simulate",
            "--scheme",
            scheme,
            "--input",
            input.to_str().unwrap(),
            "--draws",
            "20",
            "--seed",
            "7",
            "--budget",
            "2",
            "--episodes",
            "2000",
        ]))
        .simulation
        .unwrap()
    };
    assert_eq!(run("waterlevel").ruin_probability, 0.0);
    assert!(run("flat").ruin_probability > 0.1);
}

#[test]
fn report_round_trips_and_exports_prices() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "coin.csv", COIN_TOSS);
    let output = dir.path().join("out.json");
    let csv = dir.path().join("prices.csv");
    let out = steadyprice(&[
        "verify",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&output).unwrap();
    let parsed: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.to_json(), text);

    let out = steadyprice(&[
        "price",
        "--scheme",
        "waterlevel",
        "--input",
        input.to_str().unwrap(),
        "--rho",
        "1.5,3",
        "--prices-csv",
        csv.to_str().unwrap(),
    ]);
    let r = report(&out);
    assert_eq!(r.report.rho_moments.len(), 3);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "r_1,f,q,v,p\n1,0.5,1,3,2\n0,0.5,1,0,0\n"
    );
}
