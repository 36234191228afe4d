use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn phantom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phantom"))
        .args(args)
        .env("PHANTOM_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn figure3_columns_and_references() {
    let dir = tempfile::tempdir().unwrap();
    let out = phantom(dir.path(), &["figure", "3", "--n", "20", "--q", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "figure3.csv");
    for key in ["# tool: phantom", "# backend: float", "# precision: 256", "# seed: 0", "# config: {"] {
        assert!(csv.contains(key), "missing header {key}");
    }
    assert!(csv.contains("# ref lambda2_bulk: 6.4"));
    assert!(csv.contains("# ref lambda_ps: 1e0"));
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "t,otoc_deflated,random_deflated,otoc_rate,random_rate");
    assert_eq!(lines.len(), 1 + 61);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["figure", "2", "--n", "12", "--seed", "9"];
    assert!(phantom(a.path(), &args).status.success());
    assert!(phantom(b.path(), &args).status.success());
    assert_eq!(read(a.path(), "figure2.csv"), read(b.path(), "figure2.csv"));
    let walk = ["random-walk", "--n", "10", "--trials", "2000", "--seed", "3"];
    assert!(phantom(a.path(), &walk).status.success());
    assert!(phantom(b.path(), &walk).status.success());
    let name = "random-walk_m10_q2.csv";
    assert_eq!(read(a.path(), name), read(b.path(), name));
}

#[test]
fn rates_report_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rates", "--model", "pbc", "--n", "24", "--q", "2", "--threshold", "0.55", "--format", "json"];
    let out = phantom(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "rates_pbc_n24_q2.json")).unwrap();
    let r = &doc["data"]["report"];
    for key in ["lambda2", "lambda_ps", "lambda_ph", "t_c"] {
        assert!(r[key].is_number(), "{key} missing");
    }
    assert!((r["lambda_ps"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["t_c"].as_f64().unwrap() > 24.0);
    assert_eq!(doc["meta"]["config"]["threshold"], 0.55);
}

#[test]
fn pseudospectrum_grid_columns() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["pseudospectrum", "--model", "obc", "--n", "12", "--eps", "1e-5", "--grid", "21"];
    assert!(phantom(dir.path(), &args).status.success());
    let csv = read(dir.path(), "pseudospectrum_obc_n12_q2.csv");
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "re,im,sigma_min,in_set");
    assert_eq!(lines.len(), 1 + 21 * 21);
    assert!(lines[1..].iter().any(|l| l.ends_with(",1")));
}

#[test]
fn jordan_iteration_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["jordan", "--n", "10", "--mu", "5/4", "--backend", "rational"];
    assert!(phantom(dir.path(), &args).status.success());
    let csv = read(dir.path(), "jordan_n10.csv");
    for row in data_lines(&csv).iter().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1], f[2], "row {row}");
    }
}

#[test]
fn every_figure_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (n, extra) in [("1", "8"), ("4", "12"), ("5", "4"), ("6", "6"), ("7", "20"), ("8", "")] {
        let mut args = vec!["figure", n, "--grid", "11", "--t-max", "12"];
        if !extra.is_empty() {
            args.extend(["--n", extra]);
        }
        let out = phantom(dir.path(), &args);
        assert!(out.status.success(), "figure {n}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["figure1", "figure4a", "figure4b", "figure5", "figure6a", "figure6b", "figure7", "figure8"] {
        assert!(dir.path().join(format!("{f}.csv")).exists(), "{f}");
    }
    let walk = read(dir.path(), "figure5.csv");
    assert!(walk.contains("8/25"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phantom(dir.path(), &["obc-otoc", "--bogus"]).status.code(), Some(2));
    assert_eq!(phantom(dir.path(), &["figure", "9"]).status.code(), Some(2));
    assert_eq!(phantom(dir.path(), &["jordan", "--mu", "x/2"]).status.code(), Some(2));
    assert_eq!(phantom(dir.path(), &["obc-otoc", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = phantom(dir.path(), &["rates", "--model", "obc", "--n", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn stdout_when_no_directory() {
    let out = Command::new(env!("CARGO_BIN_EXE_phantom"))
        .args(["spectrum", "--model", "pbc", "--n", "4"])
        .env_remove("PHANTOM_OUT_DIR")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines[0], "index,label_a,label_b,re,im");
    assert!(lines.len() > 4);
}
