use std::process::{Command, Output};

use ekr_core::cli::{Report, HISTOGRAM_COLUMNS, SWEEP_COLUMNS};
use ekr_core::sampler::Family;

fn ekr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ekr"))
        .args(args)
        .env_remove("EKR_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = ekr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ekr(args).status.code().unwrap()
}

#[test]
fn exit_codes_are_stable() {
    assert_eq!(code(&["threshold", "--n", "400", "--k", "40"]), 0);
    assert_eq!(code(&["threshold", "--n", "4", "--k", "3"]), 2);
    assert_eq!(code(&["threshold", "--n", "6", "--k", "3", "--r", "3"]), 2);
    assert_eq!(code(&["bounds", "--n", "6", "--k", "3", "--p", "1.5"]), 2);
    assert_eq!(code(&["simulate", "--n", "6", "--k", "3"]), 2);
    assert_eq!(code(&["simulate", "--n", "6", "--k", "3", "--t", "2", "--trials", "0"]), 2);
    assert_eq!(code(&["simulate", "--n", "6", "--k", "3", "--t", "21", "--trials", "5"]), 3);
    assert_eq!(code(&["oracle", "--n", "10", "--k", "5", "--t", "5"]), 5);
    assert_eq!(code(&["simulate", "--n", "1025", "--k", "2", "--t", "2"]), 5);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn json_reports_round_trip() {
    for args in [
        vec!["threshold", "--n", "400", "--k", "40"],
        vec!["bounds", "--n", "6", "--k", "3", "--b", "1", "--p", "0.001"],
        vec!["oracle", "--n", "5", "--k", "2", "--p", "0.05"],
        vec!["simulate", "--n", "60", "--k", "6", "--A", "1", "--trials", "300", "--r-max", "1", "--bootstrap", "50"],
        vec!["sweep", "--n", "60", "--k", "6", "--a-grid", "0.5,1", "--trials", "100", "--format", "json"],
    ] {
        let text = stdout(&args);
        let report: Report = serde_json::from_str(&text).unwrap();
        let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(report, again, "{args:?}");
        assert_eq!(report.meta.version, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn simulate_defaults_are_recorded() {
    let r: Report = serde_json::from_str(&stdout(&["simulate", "--n", "20", "--k", "4", "--t", "1", "--trials", "40"])).unwrap();
    assert_eq!(r.meta.seed, Some(42));
    assert_eq!(r.empirical["estimate"]["estimate"], 1.0);
    let r: Report = serde_json::from_str(&stdout(&["simulate", "--n", "20", "--k", "4", "--t", "3"])).unwrap();
    assert_eq!(r.meta.trials, Some(10_000));
}

#[test]
fn a_parameterization_reports_realized_ratio() {
    let r: Report = serde_json::from_str(&stdout(&["simulate", "--n", "400", "--k", "40", "--A", "1", "--trials", "10"])).unwrap();
    let size = &r.inputs["size"];
    assert_eq!(size["t"], 13);
    assert_eq!(size["requested_a"], 1.0);
    let realized = size["realized_a"].as_f64().unwrap();
    assert!((realized - 13.0 / 13.0696).abs() < 1e-3);
}

#[test]
fn output_independent_of_threads() {
    let base = ["simulate", "--n", "100", "--k", "10", "--t", "40", "--trials", "500", "--r-max", "2", "--bootstrap", "100"];
    let one = stdout(&[&base[..], &["--threads", "1"]].concat());
    let four = stdout(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn sweep_csv_columns_and_monotone_estimates() {
    let text = stdout(&["sweep", "--n", "400", "--k", "40", "--a-grid", "0.25,0.5,1,2,3", "--trials", "3000"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SWEEP_COLUMNS));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    // Each estimate sits below the previous row's upper CI bound.
    for pair in rows.windows(2) {
        assert!(pair[1][7] <= pair[0][9], "{pair:?}");
    }
    assert!(rows[0][7] > rows[4][7]);
}

#[test]
fn histogram_csv() {
    let text = stdout(&["simulate", "--n", "30", "--k", "3", "--t", "8", "--trials", "200", "--r-max", "1", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HISTOGRAM_COLUMNS));
    let mut mass = [0.0; 2];
    let mut counts = [0_u64; 2];
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let r: usize = f[0].parse().unwrap();
        counts[r] += f[2].parse::<u64>().unwrap();
        mass[r] += f[3].parse::<f64>().unwrap();
    }
    assert_eq!(counts, [200, 200]);
    assert!(mass.iter().all(|m| (m - 1.0).abs() < 1e-12));
}

#[test]
fn output_dir_and_family_file() {
    let dir = tempfile::tempdir().unwrap();
    let family_path = dir.path().join("family.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_ekr"))
        .args(["simulate", "--n", "50", "--k", "5", "--t", "12", "--trials", "20", "--output", "sub/report.json"])
        .arg("--family-out")
        .arg(&family_path)
        .env("EKR_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sub/report.json")).unwrap()).unwrap();
    assert_eq!(report.inputs["n"], 50);
    let family = Family::from_text(&std::fs::read_to_string(&family_path).unwrap()).unwrap();
    assert_eq!(family.len(), 12);
    assert_eq!(family.model.trial_index, 0);
}

#[test]
fn oracle_and_bounds_examples() {
    let r: Report = serde_json::from_str(&stdout(&["oracle", "--n", "4", "--k", "2", "--t", "2"])).unwrap();
    assert!((r.analytic["p_no_disjoint"].as_f64().unwrap() - 0.8).abs() < 1e-15);
    assert_eq!(r.analytic["denominator"], 15);
    let csv = stdout(&["bounds", "--n", "6", "--k", "3", "--r", "0", "--p", "0.001", "--format", "csv"]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!((row[8].parse::<f64>().unwrap() - 0.001999).abs() < 1e-12);
}
