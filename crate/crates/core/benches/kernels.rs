//! Sequential vs parallel execution of the two data-parallel kernels: the
//! node chains of one filter application and an oracle gap scan.

use std::hint::black_box;

use adiabat_core::filter::{
    estimate_ground_energy, gaussian_filter, make_filter_plan_with, FilterOptions,
};
use adiabat_core::model::{build_path, ModelSpec};
use adiabat_core::mps::MatrixProductState;
use adiabat_core::oracle::{gap_scan, OracleLimits};
use adiabat_core::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn filter_step(c: &mut Criterion) {
    let n = 8;
    let s = 0.3;
    let path = build_path(&ModelSpec::tfim_para(n, 0.5, 1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = MatrixProductState::random(n, 2, 8, &mut rng)
        .normalized()
        .unwrap();
    let shift = estimate_ground_energy(&psi, &path, s).unwrap();
    let mut group = c.benchmark_group("gaussian_filter_n8");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = FilterOptions {
            exec,
            evolve_bond_cap: Some(16),
            ..FilterOptions::default()
        };
        let plan = make_filter_plan_with(9.0, path.gap(), n, path.coupling(), 1e-3, &opts).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &plan, |b, plan| {
            b.iter(|| gaussian_filter(black_box(&psi), &path, s, plan, &shift).unwrap())
        });
    }
    group.finish();
}

fn oracle_scan(c: &mut Criterion) {
    let path = build_path(&ModelSpec::tfim_para(10, 0.5, 1.0)).unwrap();
    let grid: Vec<f64> = (0..8).map(|k| 0.5 * k as f64 / 7.0).collect();
    let limits = OracleLimits::default();
    let mut group = c.benchmark_group("gap_scan_n10");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| gap_scan(&path, black_box(&grid), exec, &limits).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, filter_step, oracle_scan);
criterion_main!(benches);
