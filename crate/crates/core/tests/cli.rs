// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calibre-reg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn simulate(dir: &Path, scenario: &str, n: usize, seed: u64) -> String {
    let path = dir.join(format!("{scenario}.csv"));
    let out = run(&[
        "simulate",
        "--scenario",
        scenario,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_sigma_row_is_a_validation_error_citing_the_row() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.csv");
    fs::write(&p, "mu,sigma,y\n0.0,1.0,0.5\n0.0,0.0,0.1\n").unwrap();
    let out = run(&["evaluate", "--input", p.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("non-positive sigma at row 1"), "{}", stderr(&out));
}

#[test]
fn zero_bins_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "oracle", 200, 1);
    let out = run(&["evaluate", "--input", &input, "--n-bins", "0", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn too_many_bins_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "oracle", 20, 1);
    let out = run(&["evaluate", "--input", &input, "--n-bins", "21", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn empty_input_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("empty.csv");
    fs::write(&p, "mu,sigma,y\n").unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = run(&["evaluate", "--input", p.to_str().unwrap(), "--out-dir", out_dir]);
    assert_eq!(code(&out), 2);
    let out = run(&["compare", "--input", p.to_str().unwrap(), "--allow-same-set", "--out-dir", out_dir]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_file_and_bad_flags_are_usage_errors() {
    assert_eq!(code(&run(&["evaluate", "--input", "/nonexistent/x.csv"])), 1);
    assert_eq!(code(&run(&["evaluate"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn single_input_without_split_or_opt_in_is_refused() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "overconfident", 500, 2);
    let out_dir = dir.path().join("o");
    let out = run(&["calibrate", "--method", "std_scaling", "--input", &input, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(!out_dir.join("calibrator.json").exists());
    let out = run(&[
        "calibrate", "--input", &input, "--allow-same-set", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out_dir.join("summary.json"))["same_set"], true);
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "oracle", 200, 1);
    let out = run(&["calibrate", "--input", &input, "--split", "0.5", "--method", "temperature"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn oracle_evaluation_is_well_calibrated() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "oracle", 50_000, 4);
    let out = run(&["evaluate", "--input", &input, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&dir.path().join("report.json"));
    assert_eq!(rep["schema_version"], 1);
    assert!(rep["ence"].as_f64().unwrap() < 0.05);
    assert_eq!(rep["bins"].as_array().unwrap().len(), 15);
}

#[test]
fn calibrate_writes_all_reports_and_reduces_overconfident_ence() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "overconfident", 50_000, 5);
    let out_dir = dir.path().join("cal");
    let out = run(&[
        "calibrate", "--input", &input, "--split", "6000", "--method", "std_scaling",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["calibrator.json", "recal_before.json", "recal_after.json", "val_before.json", "val_after.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let cal = json(&out_dir.join("calibrator.json"));
    assert_eq!(cal["method"], "std_scaling");
    let s = cal["s"].as_f64().unwrap();
    assert!((1.95..=2.05).contains(&s), "{s}");
    let before = json(&out_dir.join("val_before.json"))["ence"].as_f64().unwrap();
    let after = json(&out_dir.join("val_after.json"))["ence"].as_f64().unwrap();
    assert!(after < before);
    assert_eq!(json(&out_dir.join("val_before.json"))["n_records"], 44_000);
}

#[test]
fn interval_calibrate_on_random_uncertainty_shows_the_contrast() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "random", 50_000, 6);
    let out_dir = dir.path().join("cal");
    let out = run(&[
        "calibrate", "--input", &input, "--split", "6000", "--method", "interval",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = json(&out_dir.join("summary.json"));
    assert!(summary["interval_max_abs_deviation_after"].as_f64().unwrap() < 0.02);
    assert!(summary["validation"]["ence_after"].as_f64().unwrap() > 0.5);
    assert_eq!(summary["validation"]["skipped"], 0);
    let cal = json(&out_dir.join("calibrator.json"));
    assert_eq!(cal["method"], "interval");
    assert!(cal["map"]["knots"].as_array().unwrap().len() > 2);
}

#[test]
fn compare_table_has_three_columns_with_shared_cv_under_scaling() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "overconfident", 20_000, 7);
    let out_dir = dir.path().join("cmp");
    let out = run(&["compare", "--input", &input, "--split", "6000", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let t = json(&out_dir.join("compare.json"));
    let cols = t["columns"].as_array().unwrap();
    let names: Vec<_> = cols.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["before", "std_scaling", "interval"]);
    let cv0 = cols[0]["cv"].as_f64().unwrap();
    let cv1 = cols[1]["cv"].as_f64().unwrap();
    assert!((cv0 - cv1).abs() < 1e-12);
    let e0 = cols[0]["ence"].as_f64().unwrap();
    assert!(cols[1]["ence"].as_f64().unwrap() < e0);
    assert!(cols[2]["ence"].as_f64().unwrap() < e0);
}

#[test]
fn recal_and_val_files_are_accepted() {
    let dir = TempDir::new().unwrap();
    let recal = dir.path().join("r.csv");
    let val = dir.path().join("v.json");
    fs::write(&recal, "mu,sigma,y\n0,1,0.5\n0,1,-1.5\n1,2,2\n1,2,-3\n").unwrap();
    fs::write(&val, r#"[{"mu":0,"sigma":1,"y":0.1},{"mu":0,"sigma":2,"y":1}]"#).unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "calibrate", "--recal", recal.to_str().unwrap(), "--val", val.to_str().unwrap(),
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["calibrate", "--recal", recal.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

fn dir_bytes(dir: &Path, ext: &str) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn every_subcommand_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = simulate(dir.path(), "random", 10_000, 8);
    let b_path = dir.path().join("again.csv");
    run(&["simulate", "--scenario", "random", "--n", "10000", "--seed", "8", "--output", b_path.to_str().unwrap()]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b_path).unwrap());

    for sub in [
        vec!["evaluate", "--input", a.as_str()],
        vec!["calibrate", "--input", a.as_str(), "--split", "0.3", "--seed", "9", "--method", "interval"],
        vec!["calibrate", "--input", a.as_str(), "--split", "0.3", "--seed", "9"],
        vec!["compare", "--input", a.as_str(), "--split", "2000"],
    ] {
        let outs: Vec<_> = (0..2)
            .map(|i| {
                let o = dir.path().join(format!("{}-{i}", sub[0]));
                let mut args = sub.clone();
                args.extend(["--svg", "--out-dir", o.to_str().unwrap()]);
                let out = run(&args);
                assert_eq!(code(&out), 0, "{}", stderr(&out));
                (out.stdout, dir_bytes(&o, "json"), dir_bytes(&o, "svg"))
            })
            .collect();
        assert!(!outs[0].1.is_empty());
        assert_eq!(outs[0], outs[1], "{sub:?}");
    }
}

#[test]
fn svg_flag_does_not_change_reported_numbers() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "random", 8_000, 10);
    let plain = dir.path().join("plain");
    let drawn = dir.path().join("drawn");
    for (o, svg) in [(&plain, false), (&drawn, true)] {
        let mut args = vec!["compare", "--input", input.as_str(), "--split", "3000", "--out-dir", o.to_str().unwrap()];
        if svg {
            args.push("--svg");
        }
        assert_eq!(code(&run(&args)), 0);
    }
    assert_eq!(dir_bytes(&plain, "json"), dir_bytes(&drawn, "json"));
    let svg = fs::read_to_string(drawn.join("compare.svg")).unwrap();
    assert!(svg.contains("RMV") && svg.contains("RMSE") && svg.contains("stroke-dasharray"));
}

#[test]
fn cauchy_simulation_writes_pit_column() {
    let dir = TempDir::new().unwrap();
    let p = simulate(dir.path(), "cauchy", 1000, 11);
    let text = fs::read_to_string(p).unwrap();
    assert!(text.starts_with("y,gamma,pit\n"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let input = simulate(dir.path(), "random", 5_000, 12);
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let o = dir.path().join(format!("t{threads}"));
        let out = bin()
            .env("CALIBRE_REG_THREADS", threads)
            .args(["compare", "--input", &input, "--split", "0.5", "--out-dir", o.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        reports.push(fs::read(o.join("compare.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let out = bin().env("CALIBRE_REG_THREADS", "zero").args(["--version"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let out = bin()
        .env("CALIBRE_REG_THREADS", "zero")
        .args(["evaluate", "--input", &input, "--out-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}
