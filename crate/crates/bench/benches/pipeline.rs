//! Benchmarks for the hot paths: assignment solvers, symmetric
//! eigendecomposition, sample-covariance accumulation, and the blind
//! pipeline end to end.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use graphmatch_bench::{random_profit, random_symmetric};
use graphmatch_core::{
    blind_match, gen_er, generate_signals, greedy_assign, hungarian, laplacian,
    sample_covariance, BlindMode, BlindParams, Excitation, GraphFilter, SignalModel, Solver,
};

fn bench_assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("assignment");
    for &n in &[50usize, 200] {
        let profit = random_profit(n, 7);
        group.bench_with_input(BenchmarkId::new("hungarian", n), &profit, |b, p| {
            b.iter(|| hungarian(black_box(p)))
        });
        group.bench_with_input(BenchmarkId::new("greedy", n), &profit, |b, p| {
            b.iter(|| greedy_assign(black_box(p)))
        });
    }
    group.finish();
}

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_sym");
    for &n in &[50usize, 200] {
        let m = random_symmetric(n, 11);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| graphmatch_core::eig_sym(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn bench_covariance(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_covariance");
    group.sample_size(20);
    let l = laplacian(&gen_er(100, 0.3, 3).unwrap());
    let model = SignalModel {
        filter: GraphFilter::Resolvent { alpha: 0.2 },
        sigma2: 0.01,
        excitation: Excitation::StandardNormal,
    };
    let batch = generate_signals(&model, &l, 20_000, 5).unwrap();
    group.bench_function("n100_m20000", |b| {
        b.iter(|| sample_covariance(black_box(&batch)).unwrap())
    });
    group.finish();
}

fn bench_blind_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("blind_match");
    group.sample_size(10);
    let l = laplacian(&gen_er(30, 0.4, 9).unwrap());
    let model = SignalModel {
        filter: GraphFilter::Resolvent { alpha: 0.2 },
        sigma2: 0.01,
        excitation: Excitation::StandardNormal,
    };
    let y1 = generate_signals(&model, &l, 5_000, 21).unwrap();
    let y2 = generate_signals(&model, &l, 5_000, 22).unwrap();
    let params = BlindParams {
        eps: 30.0 / 20.0,
        varsigma: 1.0 / (300.0f64 * 300.0),
        solver: Solver::Hungarian,
        identifiability_mode: BlindMode::SelfSwap,
        k_override: None,
    };
    group.bench_function("n30_m5000", |b| {
        b.iter(|| blind_match(black_box(&y1), black_box(&y2), black_box(&params)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_assignment,
    bench_eig,
    bench_covariance,
    bench_blind_pipeline
);
criterion_main!(benches);
