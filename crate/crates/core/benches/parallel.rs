use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use adoheston::sim::{simulate_q, SimConfig};
use adoheston::skew::{log_grid, skew_curve};
use adoheston::{Execution, ModelParams, QuadratureConfig};

fn modes() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn bench_skew_curve(c: &mut Criterion) {
    let mp = ModelParams::new(0.1, 1.0, 0.01, 0.7, 100.0, 0.5).unwrap();
    let q = QuadratureConfig::default();
    let grid = log_grid(0.001, 0.3, 50).unwrap();
    let mut group = c.benchmark_group("skew_curve");
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| skew_curve(&grid, &mp, &q, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let mut mp = ModelParams::new(0.3, 1.0, 0.01, 0.7, 0.1, 0.5).unwrap();
    mp.v0 = 0.5;
    mp.vv0 = 200.0;
    let mut group = c.benchmark_group("simulate_q");
    group.sample_size(20);
    for (name, exec) in modes() {
        let cfg = SimConfig {
            n_paths: 4096,
            n_steps: 128,
            seed: 1,
            record_stride: 128,
            execution: exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| simulate_q(&mp, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_skew_curve, bench_simulate);
criterion_main!(benches);
