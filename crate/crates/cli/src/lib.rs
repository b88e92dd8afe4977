//! Command implementations behind the `sliceopt` binary: single-instance
//! solving, gain and offloader sweeps, and solution re-validation. All
//! commands are deterministic given their flags and seed; outputs carry a
//! manifest recording the config snapshot, seed and RNG algorithm.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use sliceopt_core::montecarlo::{
    run_gain_sweep_capped, run_offloader_sweep_capped, SolverMethod,
};
use sliceopt_core::scenario::generate;
use sliceopt_core::solver::{
    auto_solve, best_response_solve, exhaustive_solve, DEFAULT_MAX_SPACE,
};
use sliceopt_core::validate::validate_solution;
use sliceopt_core::{
    Error as CoreError, InterSliceMode, ScenarioConfig, Solution, RNG_ALGORITHM_ID,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SEARCH_SPACE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Environment variable overriding the exhaustive enumeration cap.
pub const MAX_SPACE_ENV: &str = "SLICEOPT_MAX_SPACE";

pub const DEFAULT_BR_ROUNDS: u64 = 100;

/// Command failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    fn validation(msg: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_VALIDATION,
            message: msg.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let exit_code = match e {
            CoreError::SearchSpaceTooLarge { .. } => EXIT_SEARCH_SPACE,
            _ => EXIT_CONFIG,
        };
        Self {
            exit_code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Enumeration cap: `SLICEOPT_MAX_SPACE` when set, 10^6 otherwise.
pub fn max_space() -> u128 {
    std::env::var(MAX_SPACE_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_SPACE)
}

/// Provenance block attached to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub rng_algorithm: String,
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; excluded from determinism comparisons.
    pub timestamp: u64,
    pub parameters: serde_json::Value,
    pub config: ScenarioConfig,
}

impl RunManifest {
    fn new(command: &str, seed: u64, parameters: serde_json::Value, config: ScenarioConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM_ID.to_string(),
            command: command.to_string(),
            seed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            parameters,
            config,
        }
    }
}

/// The JSON document `solve` emits and `validate` consumes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub manifest: RunManifest,
    pub solution: Solution,
    pub feasible: bool,
}

pub fn load_config(path: &Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError {
        exit_code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn solve_with(
    model: &sliceopt_core::SystemModel,
    config: &ScenarioConfig,
    method: SolverMethod,
    inter: InterSliceMode,
    seed: u64,
) -> CliResult<Solution> {
    let cap = max_space();
    let solution = match method {
        SolverMethod::Exhaustive => exhaustive_solve(model, inter, config.stability_mode, cap)?,
        SolverMethod::BestResponse => {
            best_response_solve(model, inter, config.stability_mode, DEFAULT_BR_ROUNDS, seed)?
        }
        SolverMethod::Auto => auto_solve(
            model,
            inter,
            config.stability_mode,
            cap,
            DEFAULT_BR_ROUNDS,
            seed,
        )?,
    };
    Ok(solution)
}

/// Solves one generated instance and writes the solution document.
pub fn cmd_solve(
    config_path: &Path,
    seed: u64,
    method: SolverMethod,
    inter: InterSliceMode,
    out_path: &Path,
) -> CliResult<()> {
    let config = load_config(config_path)?;
    let model = generate(&config, seed)?;
    let solution = solve_with(&model, &config, method, inter, seed)?;
    let feasible = validate_solution(&model, &solution, config.stability_mode).is_ok();
    let doc = SolutionDocument {
        manifest: RunManifest::new(
            "solve",
            seed,
            serde_json::json!({
                "method": method,
                "inter_mode": inter,
                "max_space": max_space().to_string(),
            }),
            config,
        ),
        solution,
        feasible,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    write_file(out_path, &text)
}

fn format_float(v: f64) -> String {
    // shortest round-trip decimal, '.' separator
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

fn method_label(m: sliceopt_core::Method) -> &'static str {
    match m {
        sliceopt_core::Method::Exhaustive => "exhaustive",
        sliceopt_core::Method::BestResponse => "best_response",
    }
}

fn aggregate_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_agg.{ext}"))
}

fn manifest_path(out: &Path) -> PathBuf {
    let name = out.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{name}.manifest.json"))
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&manifest_path(out), &text)
}

fn check_sweep_lists(slices: &[usize], wds: &[usize]) -> CliResult<()> {
    if slices.is_empty() || wds.is_empty() {
        return Err(CliError::config(
            "slice and WD count lists must be non-empty",
        ));
    }
    Ok(())
}

/// Gain sweep: per-run CSV at `out`, aggregates at `<stem>_agg.<ext>`,
/// manifest sidecar at `<out>.manifest.json`.
pub fn cmd_sweep_gain(
    config_path: &Path,
    slices: &[usize],
    wds: &[usize],
    runs: u64,
    seed: u64,
    method: SolverMethod,
    out_csv: &Path,
) -> CliResult<()> {
    let config = load_config(config_path)?;
    check_sweep_lists(slices, wds)?;
    if runs < 2 {
        return Err(CliError::config("need at least 2 runs"));
    }
    let report = run_gain_sweep_capped(&config, slices, wds, runs, method, seed, max_space())?;

    let mut per_run = String::from("num_slices,num_wds,run,gain,method\n");
    for r in &report.records {
        writeln!(
            per_run,
            "{},{},{},{},{}",
            r.num_slices,
            r.num_wds,
            r.run,
            format_float(r.gain),
            method_label(r.method)
        )
        .unwrap();
    }
    write_file(out_csv, &per_run)?;

    let mut agg = String::from("num_slices,num_wds,mean_gain,ci_low,ci_high,runs\n");
    for a in &report.aggregates {
        writeln!(
            agg,
            "{},{},{},{},{},{}",
            a.num_slices,
            a.num_wds,
            format_float(a.mean_gain),
            format_float(a.ci_low),
            format_float(a.ci_high),
            a.runs
        )
        .unwrap();
    }
    write_file(&aggregate_path(out_csv), &agg)?;

    let manifest = RunManifest::new(
        "sweep-gain",
        seed,
        serde_json::json!({
            "slices": slices,
            "wds": wds,
            "runs": runs,
            "method": method,
            "max_space": max_space().to_string(),
        }),
        config,
    );
    write_manifest(out_csv, &manifest)
}

/// Offloader sweep: aggregate CSV at `out`, manifest sidecar alongside.
pub fn cmd_sweep_offloaders(
    config_path: &Path,
    slices: &[usize],
    wds: &[usize],
    runs: u64,
    seed: u64,
    method: SolverMethod,
    out_csv: &Path,
) -> CliResult<()> {
    let config = load_config(config_path)?;
    check_sweep_lists(slices, wds)?;
    if runs < 2 {
        return Err(CliError::config("need at least 2 runs"));
    }
    let report = run_offloader_sweep_capped(&config, slices, wds, runs, method, seed, max_space())?;

    let mut csv = String::from("num_slices,num_wds,slice,mean_offloaders,ci_low,ci_high\n");
    for a in &report.aggregates {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            a.num_slices,
            a.num_wds,
            a.slice,
            format_float(a.mean_offloaders),
            format_float(a.ci_low),
            format_float(a.ci_high)
        )
        .unwrap();
    }
    write_file(out_csv, &csv)?;

    let manifest = RunManifest::new(
        "sweep-offloaders",
        seed,
        serde_json::json!({
            "slices": slices,
            "wds": wds,
            "runs": runs,
            "method": method,
            "max_space": max_space().to_string(),
        }),
        config,
    );
    write_manifest(out_csv, &manifest)
}

/// Regenerates the model from (config, seed) and re-checks the solution
/// document: every constraint plus a from-scratch cost recomputation.
pub fn cmd_validate(solution_path: &Path, config_path: &Path, seed: u64) -> CliResult<()> {
    let config = load_config(config_path)?;
    let text = std::fs::read_to_string(solution_path).map_err(|e| {
        CliError::config(format!(
            "cannot read solution {}: {e}",
            solution_path.display()
        ))
    })?;
    let doc: SolutionDocument = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!(
            "invalid solution {}: {e}",
            solution_path.display()
        ))
    })?;
    let model = generate(&config, seed)?;
    validate_solution(&model, &doc.solution, config.stability_mode)
        .map_err(|v| CliError::validation(format!("constraint violated: {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_and_manifest_paths() {
        assert_eq!(
            aggregate_path(Path::new("/tmp/gain.csv")),
            PathBuf::from("/tmp/gain_agg.csv")
        );
        assert_eq!(
            manifest_path(Path::new("/tmp/gain.csv")),
            PathBuf::from("/tmp/gain.csv.manifest.json")
        );
    }

    #[test]
    fn floats_use_shortest_roundtrip() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1.25e-7), "0.000000125");
    }
}
