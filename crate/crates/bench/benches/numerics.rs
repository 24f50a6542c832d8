use std::f64::consts::LN_2;
use std::hint::black_box;

use bellman_lab::candidates::{check_parabolic_concavity, AxisRange, CandidateSpec, ScanGrid};
use bellman_lab::lab::{main_inequality_check, scan_alpha, ExampleFamilySpec, FamilyProcess};
use bellman_lab::martingale::{exp_moment, random_martingale};
use bellman_lab::solver::{bellman_step_1d, default_initial};
use bellman_lab::{IncrementLaw, SolverConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn concavity_scan(c: &mut Criterion) {
    let main = CandidateSpec::main();
    let grid = ScanGrid {
        x: AxisRange::new(-5.0, 3.0, 0.05),
        y: AxisRange::new(0.0, 2.0, 0.05),
    };
    let deltas = AxisRange::new(-2.0, 2.0, 0.05);
    c.bench_function("concavity_scan_161x41x81", |b| {
        b.iter(|| check_parabolic_concavity(black_box(&main), &grid, &deltas).unwrap())
    });
}

fn bellman_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("bellman_step_1d");
    group.sample_size(20);
    for step in [0.02, 0.005] {
        let cfg = SolverConfig {
            x_step: step,
            delta_step: step,
            ..SolverConfig::default()
        };
        let f = default_initial(&cfg).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(step), &cfg, |b, cfg| {
            b.iter(|| bellman_step_1d(black_box(&f), cfg).unwrap())
        });
    }
    group.finish();
}

fn leaf_fold(c: &mut Criterion) {
    let mut group = c.benchmark_group("exp_moment");
    let tree = random_martingale(16, IncrementLaw::Gaussian { sigma: 0.5 }, 7).unwrap();
    group.bench_function("materialized_depth_16", |b| {
        b.iter(|| exp_moment(black_box(&tree), |v, s| v - 2.0 * s).unwrap())
    });
    let family = FamilyProcess::new(ExampleFamilySpec::new(20, LN_2).unwrap()).unwrap();
    group.bench_function("family_stream_depth_20", |b| {
        b.iter(|| main_inequality_check(black_box(&family), 1.0).unwrap())
    });
    group.finish();
}

fn family_scan(c: &mut Criterion) {
    let depths: Vec<usize> = (1..=16).collect();
    c.bench_function("scan_alpha_16_depths", |b| {
        b.iter(|| scan_alpha(black_box(&depths), LN_2, &[1.0, 2.0]).unwrap())
    });
}

criterion_group!(benches, concavity_scan, bellman_step, leaf_fold, family_scan);
criterion_main!(benches);
