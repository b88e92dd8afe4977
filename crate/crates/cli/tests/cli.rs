//! End-to-end tests of the `sliceopt` binary: exit codes, file schemas,
//! determinism, and validation failure modes.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sliceopt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"num_wds": 2, "num_aps": 2, "num_coins": 1, "num_mecs": 1, "num_slices": 2}"#;

/// Parses a solution file with the timestamp zeroed out.
fn canonical(path: &Path) -> serde_json::Value {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    doc["manifest"]["timestamp"] = 0.into();
    doc
}

#[test]
fn solve_then_validate_roundtrip() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("solution.json");
    let solve = run(&[
        "solve", "--config", &config, "--seed", "11", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(solve.status.success(), "{:?}", solve);

    let doc = canonical(&out);
    assert_eq!(doc["feasible"], true);
    assert_eq!(doc["manifest"]["seed"], 11);
    assert!(doc["solution"]["delta"]["decisions"].is_array());
    assert!(doc["solution"]["policies"]["inter_radio"].is_array());

    let validate = run(&[
        "validate", "--solution", out.to_str().unwrap(), "--config", &config, "--seed", "11",
    ]);
    assert!(validate.status.success(), "{:?}", validate);
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), r#"{"num_devices": 3}"#);
    let out = dir.path().join("solution.json");
    let solve = run(&[
        "solve", "--config", &config, "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(solve.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&solve.stderr);
    assert!(stderr.contains("num_devices"), "stderr: {stderr}");
}

#[test]
fn unparseable_json_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "{not json");
    let out = dir.path().join("solution.json");
    let solve = run(&[
        "solve", "--config", &config, "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(solve.status.code(), Some(2));
}

#[test]
fn solve_is_deterministic_modulo_timestamp() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let solve = run(&[
            "solve", "--config", &config, "--seed", "99", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(solve.status.success());
    }
    assert_eq!(canonical(&out1), canonical(&out2));
}

#[test]
fn explicit_exhaustive_respects_search_space_cap() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("solution.json");
    let solve = bin()
        .env("SLICEOPT_MAX_SPACE", "3")
        .args([
            "solve", "--config", &config, "--seed", "1", "--method", "exhaustive", "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(solve.status.code(), Some(3));
}

#[test]
fn sweep_gain_headers_and_single_slice_gain() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("gain.csv");
    let sweep = run(&[
        "sweep-gain", "--config", &config, "--seed", "5", "--runs", "3",
        "--slices", "1", "--wds", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(sweep.status.success(), "{:?}", sweep);

    let per_run = std::fs::read_to_string(&out).unwrap();
    let mut lines = per_run.lines();
    assert_eq!(lines.next().unwrap(), "num_slices,num_wds,run,gain,method");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "1");
        assert_eq!(fields[3], "1");
    }

    let agg = std::fs::read_to_string(dir.path().join("gain_agg.csv")).unwrap();
    let mut lines = agg.lines();
    assert_eq!(
        lines.next().unwrap(),
        "num_slices,num_wds,mean_gain,ci_low,ci_high,runs"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "1");

    // manifest sidecar exists and references the sweep
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("gain.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "sweep-gain");
    assert_eq!(manifest["seed"], 5);
}

#[test]
fn sweep_offloaders_header_and_bound() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("off.csv");
    let sweep = run(&[
        "sweep-offloaders", "--config", &config, "--seed", "5", "--runs", "3",
        "--slices", "2", "--wds", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(sweep.status.success(), "{:?}", sweep);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "num_slices,num_wds,slice,mean_offloaders,ci_low,ci_high"
    );
    let total: f64 = lines
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!(total <= 2.0 + 1e-9);
}

#[test]
fn sweep_without_wds_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("off.csv");
    let sweep = run(&[
        "sweep-offloaders", "--config", &config, "--seed", "5", "--runs", "3",
        "--slices", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(sweep.status.code(), Some(2));
}

#[test]
fn sweeps_are_byte_identical_across_reruns() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out1 = dir.path().join("g1.csv");
    let out2 = dir.path().join("g2.csv");
    for out in [&out1, &out2] {
        let sweep = run(&[
            "sweep-gain", "--config", &config, "--seed", "8", "--runs", "4",
            "--slices", "1,2", "--wds", "2", "--out", out.to_str().unwrap(),
        ]);
        assert!(sweep.status.success());
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("g1_agg.csv")).unwrap(),
        std::fs::read(dir.path().join("g2_agg.csv")).unwrap()
    );
}

fn mutate_solution(path: &Path, f: impl FnOnce(&mut serde_json::Value)) {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    f(&mut doc);
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
}

#[test]
fn validate_rejects_mutated_omega_row() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("solution.json");
    assert!(run(&[
        "solve", "--config", &config, "--seed", "21", "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    mutate_solution(&out, |doc| {
        doc["solution"]["policies"]["inter_radio"][0] = serde_json::json!([0.9, 0.6]);
    });
    let validate = run(&[
        "validate", "--solution", out.to_str().unwrap(), "--config", &config, "--seed", "21",
    ]);
    assert_eq!(validate.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&validate.stderr);
    assert!(stderr.contains("10d"), "stderr: {stderr}");
}

#[test]
fn validate_rejects_perturbed_cost() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("solution.json");
    assert!(run(&[
        "solve", "--config", &config, "--seed", "22", "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    mutate_solution(&out, |doc| {
        let cost = doc["solution"]["cost"]["system_cost"].as_f64().unwrap();
        doc["solution"]["cost"]["system_cost"] = (cost * 1.01).into();
    });
    let validate = run(&[
        "validate", "--solution", out.to_str().unwrap(), "--config", &config, "--seed", "22",
    ]);
    assert_eq!(validate.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&validate.stderr);
    assert!(stderr.contains("cost mismatch"), "stderr: {stderr}");
}
