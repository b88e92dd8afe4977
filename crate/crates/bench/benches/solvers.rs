use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sliceopt_core::allocation::{numeric_allocation_oracle, sqrt_rule};
use sliceopt_core::scenario::{generate, ScenarioConfig};
use sliceopt_core::solver::{best_response_solve, exhaustive_solve, DEFAULT_MAX_SPACE};
use sliceopt_core::{InterSliceMode, StabilityMode};

fn small_config(num_wds: usize, num_slices: usize) -> ScenarioConfig {
    ScenarioConfig {
        num_wds,
        num_aps: 2,
        num_coins: 2,
        num_mecs: 1,
        num_slices,
        ..Default::default()
    }
}

fn bench_sqrt_rule(c: &mut Criterion) {
    let times: Vec<f64> = (1..=16).map(|k| k as f64 * 0.37).collect();
    c.bench_function("sqrt_rule_16", |b| {
        b.iter(|| sqrt_rule(black_box(&times)).unwrap())
    });
    c.bench_function("oracle_4_grid_10k", |b| {
        b.iter(|| numeric_allocation_oracle(black_box(&times[..4]), 10_000).unwrap())
    });
}

fn bench_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for wds in [2usize, 3, 4] {
        let model = generate(&small_config(wds, 2), 42).unwrap();
        group.bench_with_input(BenchmarkId::new("exhaustive", wds), &model, |b, m| {
            b.iter(|| {
                exhaustive_solve(
                    m,
                    InterSliceMode::Optimal,
                    StabilityMode::NodeTotal,
                    DEFAULT_MAX_SPACE,
                )
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("best_response", wds), &model, |b, m| {
            b.iter(|| {
                best_response_solve(m, InterSliceMode::Optimal, StabilityMode::NodeTotal, 100, 7)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_generate(c: &mut Criterion) {
    let config = small_config(10, 3);
    c.bench_function("generate_10wd", |b| {
        b.iter(|| generate(black_box(&config), 7).unwrap())
    });
}

criterion_group!(benches, bench_sqrt_rule, bench_solvers, bench_generate);
criterion_main!(benches);
