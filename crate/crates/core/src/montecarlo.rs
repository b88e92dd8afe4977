//! Batched Monte Carlo experiments: performance gain of the optimized
//! inter-slice policy over the equal share, and offloader counts per
//! slice, aggregated with Student-t confidence intervals.
//!
//! Runs are independent: each draws its own substream from the sweep seed
//! and run index, so results do not depend on worker-thread count and a
//! longer sweep reproduces a shorter one's prefix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::allocation::InterSliceMode;
use crate::error::{Error, Result};
use crate::model::Decision;
use crate::scenario::{generate, mix_seed, ScenarioConfig};
use crate::solver::{auto_solve, best_response_solve, exhaustive_solve, Method, Solution};

/// Default best-response round cap for sweep runs.
pub const DEFAULT_MAX_ROUNDS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Exhaustive,
    BestResponse,
    Auto,
}

/// One gain measurement: cost(equal share) / cost(optimal), each with its
/// own re-optimized decision vector on the same generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    pub num_slices: usize,
    pub num_wds: usize,
    pub run: u64,
    pub gain: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainAggregate {
    pub num_slices: usize,
    pub num_wds: usize,
    pub mean_gain: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub runs: u64,
    pub infeasible_runs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub records: Vec<GainRecord>,
    pub aggregates: Vec<GainAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloaderAggregate {
    pub num_slices: usize,
    pub num_wds: usize,
    pub slice: usize,
    pub mean_offloaders: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloaderReport {
    pub aggregates: Vec<OffloaderAggregate>,
}

/// Two-sided Student-t confidence interval: `mean +- t_{(1+level)/2, n-1} * s / sqrt(n)`.
/// The t quantile comes from the statrs Student-t inverse CDF.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    assert!((0.0..1.0).contains(&level));
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let std_err = variance.sqrt() / (n as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .expect("valid Student-t parameters")
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * std_err;
    Ok((mean, mean - half, mean + half))
}

fn solve_one(
    model: &crate::model::SystemModel,
    inter_mode: InterSliceMode,
    config: &ScenarioConfig,
    method: SolverMethod,
    max_space: u128,
    run_seed: u64,
) -> Result<Solution> {
    match method {
        SolverMethod::Exhaustive => {
            exhaustive_solve(model, inter_mode, config.stability_mode, max_space)
        }
        SolverMethod::BestResponse => best_response_solve(
            model,
            inter_mode,
            config.stability_mode,
            DEFAULT_MAX_ROUNDS,
            run_seed,
        ),
        SolverMethod::Auto => auto_solve(
            model,
            inter_mode,
            config.stability_mode,
            max_space,
            DEFAULT_MAX_ROUNDS,
            run_seed,
        ),
    }
}

fn cell_configs<'a>(
    base: &'a ScenarioConfig,
    slice_counts: &'a [usize],
    wd_counts: &'a [usize],
) -> impl Iterator<Item = ScenarioConfig> + 'a {
    slice_counts.iter().flat_map(move |&n| {
        wd_counts.iter().map(move |&i| ScenarioConfig {
            num_slices: n,
            num_wds: i,
            ..base.clone()
        })
    })
}

fn run_cell<T: Send>(
    config: &ScenarioConfig,
    runs: u64,
    seed: u64,
    per_run: impl Fn(&ScenarioConfig, u64, u64) -> Result<T> + Sync,
) -> Vec<Result<T>> {
    let cell_tag = mix_seed(config.num_slices as u64, config.num_wds as u64);
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = mix_seed(mix_seed(seed, cell_tag), run);
            per_run(config, run, run_seed)
        })
        .collect()
}

/// Gain sweep over (slice count, WD count) cells; each run generates one
/// instance and solves it under both inter-slice policies.
pub fn run_gain_sweep(
    base: &ScenarioConfig,
    slice_counts: &[usize],
    wd_counts: &[usize],
    runs: u64,
    method: SolverMethod,
    seed: u64,
) -> Result<GainReport> {
    run_gain_sweep_capped(base, slice_counts, wd_counts, runs, method, seed, crate::solver::DEFAULT_MAX_SPACE)
}

pub fn run_gain_sweep_capped(
    base: &ScenarioConfig,
    slice_counts: &[usize],
    wd_counts: &[usize],
    runs: u64,
    method: SolverMethod,
    seed: u64,
    max_space: u128,
) -> Result<GainReport> {
    assert!(runs >= 2, "need at least 2 runs for confidence intervals");
    base.validate()?;
    if slice_counts.is_empty() || wd_counts.is_empty() {
        return Err(Error::ConfigInvalid(
            "slice and WD count lists must be non-empty".into(),
        ));
    }
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for config in cell_configs(base, slice_counts, wd_counts) {
        let results = run_cell(&config, runs, seed, |config, run, run_seed| {
            let model = generate(config, run_seed)?;
            let optimal = solve_one(
                &model,
                InterSliceMode::Optimal,
                config,
                method,
                max_space,
                run_seed,
            )?;
            let equal = solve_one(
                &model,
                InterSliceMode::EqualShare,
                config,
                method,
                max_space,
                run_seed,
            )?;
            Ok(GainRecord {
                num_slices: config.num_slices,
                num_wds: config.num_wds,
                run,
                gain: equal.cost.system_cost / optimal.cost.system_cost,
                method: optimal.method,
            })
        });
        let mut infeasible = 0u64;
        let mut cell_records = Vec::with_capacity(runs as usize);
        for r in results {
            match r {
                Ok(rec) => cell_records.push(rec),
                Err(e @ Error::SearchSpaceTooLarge { .. }) => return Err(e),
                Err(_) => infeasible += 1,
            }
        }
        let gains: Vec<f64> = cell_records.iter().map(|r| r.gain).collect();
        let (mean, lo, hi) = confidence_interval(&gains, 0.90)?;
        aggregates.push(GainAggregate {
            num_slices: config.num_slices,
            num_wds: config.num_wds,
            mean_gain: mean,
            ci_low: lo,
            ci_high: hi,
            runs: gains.len() as u64,
            infeasible_runs: infeasible,
        });
        records.extend(cell_records);
    }
    Ok(GainReport {
        records,
        aggregates,
    })
}

/// Offloader-count sweep: per cell and slice, the mean number of WDs whose
/// optimal decision offloads into that slice.
pub fn run_offloader_sweep(
    base: &ScenarioConfig,
    slice_counts: &[usize],
    wd_counts: &[usize],
    runs: u64,
    method: SolverMethod,
    seed: u64,
) -> Result<OffloaderReport> {
    run_offloader_sweep_capped(base, slice_counts, wd_counts, runs, method, seed, crate::solver::DEFAULT_MAX_SPACE)
}

pub fn run_offloader_sweep_capped(
    base: &ScenarioConfig,
    slice_counts: &[usize],
    wd_counts: &[usize],
    runs: u64,
    method: SolverMethod,
    seed: u64,
    max_space: u128,
) -> Result<OffloaderReport> {
    assert!(runs >= 2, "need at least 2 runs for confidence intervals");
    base.validate()?;
    if slice_counts.is_empty() || wd_counts.is_empty() {
        return Err(Error::ConfigInvalid(
            "slice and WD count lists must be non-empty".into(),
        ));
    }
    let mut aggregates = Vec::new();
    for config in cell_configs(base, slice_counts, wd_counts) {
        let results = run_cell(&config, runs, seed, |config, _run, run_seed| {
            let model = generate(config, run_seed)?;
            let solution = solve_one(
                &model,
                InterSliceMode::Optimal,
                config,
                method,
                max_space,
                run_seed,
            )?;
            let mut counts = vec![0.0f64; config.num_slices];
            for d in &solution.delta.decisions {
                if let Decision::Offload { slice, .. } = d {
                    counts[*slice] += 1.0;
                }
            }
            Ok(counts)
        });
        let counts: Vec<Vec<f64>> = results.into_iter().collect::<Result<_>>()?;
        for n in 0..config.num_slices {
            let samples: Vec<f64> = counts.iter().map(|c| c[n]).collect();
            let (mean, lo, hi) = confidence_interval(&samples, 0.90)?;
            aggregates.push(OffloaderAggregate {
                num_slices: config.num_slices,
                num_wds: config.num_wds,
                slice: n,
                mean_offloaders: mean,
                ci_low: lo,
                ci_high: hi,
            });
        }
    }
    Ok(OffloaderReport { aggregates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confidence_interval_zero_variance() {
        let (mean, lo, hi) = confidence_interval(&[3.5, 3.5, 3.5], 0.90).unwrap();
        assert_eq!((mean, lo, hi), (3.5, 3.5, 3.5));
    }

    #[test]
    fn confidence_interval_two_samples() {
        // s = sqrt(2), n = 2, t_{0.95,1} = 6.3138
        let (mean, lo, hi) = confidence_interval(&[0.0, 2.0], 0.90).unwrap();
        assert_eq!(mean, 1.0);
        let half = hi - mean;
        assert!((half - 6.3138).abs() < 1e-3);
        assert!((mean - lo - half).abs() < 1e-12);
    }

    #[test]
    fn confidence_interval_needs_two_samples() {
        assert!(matches!(
            confidence_interval(&[1.0], 0.90),
            Err(Error::TooFewSamples(1))
        ));
    }

    fn tiny_base() -> ScenarioConfig {
        ScenarioConfig {
            num_wds: 2,
            num_aps: 1,
            num_coins: 1,
            num_mecs: 1,
            ..Default::default()
        }
    }

    #[test]
    fn single_slice_gain_is_exactly_one() {
        let report =
            run_gain_sweep(&tiny_base(), &[1], &[2], 10, SolverMethod::Auto, 77).unwrap();
        for rec in &report.records {
            assert_eq!(rec.gain, 1.0);
        }
        let agg = &report.aggregates[0];
        assert_eq!(agg.mean_gain, 1.0);
        assert_eq!(agg.ci_low, 1.0);
        assert_eq!(agg.ci_high, 1.0);
        assert_eq!(agg.infeasible_runs, 0);
    }

    #[test]
    fn multi_slice_gain_at_least_one() {
        let report =
            run_gain_sweep(&tiny_base(), &[2, 3], &[2, 3], 8, SolverMethod::Auto, 5).unwrap();
        for rec in &report.records {
            assert!(rec.gain >= 1.0 - 1e-9, "gain {} below 1", rec.gain);
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = run_gain_sweep(&tiny_base(), &[2], &[2], 6, SolverMethod::Auto, 9).unwrap();
        let b = run_gain_sweep(&tiny_base(), &[2], &[2], 6, SolverMethod::Auto, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn longer_sweep_reproduces_prefix() {
        let short = run_gain_sweep(&tiny_base(), &[2], &[3], 4, SolverMethod::Auto, 11).unwrap();
        let long = run_gain_sweep(&tiny_base(), &[2], &[3], 8, SolverMethod::Auto, 11).unwrap();
        assert_eq!(short.records[..], long.records[..4]);
    }

    #[test]
    fn offloader_counts_bounded_by_wds() {
        let report =
            run_offloader_sweep(&tiny_base(), &[2], &[2, 3], 6, SolverMethod::Auto, 13).unwrap();
        for group in report.aggregates.chunks(2) {
            let total: f64 = group.iter().map(|a| a.mean_offloaders).sum();
            assert!(total <= group[0].num_wds as f64 + 1e-12);
            for a in group {
                assert!(a.mean_offloaders >= 0.0);
            }
        }
    }
}
