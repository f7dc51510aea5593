use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kicked_spin::meanfield::{lyapunov_exponent, LyapunovOptions};
use kicked_spin::quantum::build_spin_operators;
use kicked_spin::trajectory::{jump_ensemble, jump_ensemble_sequential, TrajectoryOptions};
use kicked_spin::{par, BlochVector, ModelParams, Spin};

// 8×8 cells, short runs: enough work per cell for the pool to matter.
fn lyapunov_grid(c: &mut Criterion) {
    let opts = LyapunovOptions {
        periods: 400,
        ..Default::default()
    };
    let cells: Vec<ModelParams> = (0..64)
        .map(|i| ModelParams::new(1.5, 0.5 + 0.1 * (i / 8) as f64, 0.4 * (i % 8) as f64))
        .collect();
    let eta = |p: &ModelParams| lyapunov_exponent(p, BlochVector::up(), &opts).map(|r| r.eta).unwrap_or(f64::NAN);

    let mut g = c.benchmark_group("lyapunov_grid_64");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| par::map(&cells, eta)));
    g.bench_function("sequential", |b| b.iter(|| par::map_sequential(&cells, eta)));
    g.finish();
}

fn trajectory_ensemble(c: &mut Criterion) {
    let ops = build_spin_operators(Spin::new(4.0).unwrap()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 0.5);
    let opts = TrajectoryOptions {
        t_max: 5.0,
        ..Default::default()
    };
    let mut g = c.benchmark_group("trajectory_ensemble");
    g.sample_size(10);
    for n in [64usize, 256] {
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| b.iter(|| jump_ensemble(&ops, &p, &opts, n, 1).unwrap()));
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| jump_ensemble_sequential(&ops, &p, &opts, n, 1).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, lyapunov_grid, trajectory_ensemble);
criterion_main!(benches);
