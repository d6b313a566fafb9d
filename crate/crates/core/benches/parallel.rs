//! Parallel core versus a single worker thread.
//!
//! Each workload runs inside a one-thread rayon pool and inside the default
//! pool. Building with `--no-default-features` removes rayon entirely; this
//! bench requires the `parallel` feature, so the single-thread pool stands in
//! for the sequential path here.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmrf_core::algorithms::{
    label_propagation, smooth_features, PropagationBudget, SmoothingParam, Solver,
};
use gmrf_core::eval::{random_split, SplitSpec};
use gmrf_core::gmrf::{synthetic_params, Likelihood, LikelihoodMethod, StochasticConfig};
use gmrf_core::graph::watts_strogatz;
use gmrf_core::linalg::{slq_logdet, SlqConfig};
use gmrf_core::gmrf::PrecisionOperator;
use nalgebra::DMatrix;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let full = rayon::current_num_threads();
    vec![
        ("single-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("pool-{full}"), rayon::ThreadPoolBuilder::new().num_threads(full).build().unwrap()),
    ]
}

fn features(n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5)
}

fn smoothing(c: &mut Criterion) {
    let g = watts_strogatz(50_000, 6, 0.01, 1).unwrap();
    let x = features(50_000, 8);
    let s = SmoothingParam::from_omega(5.0).unwrap();
    let budget = PropagationBudget::default().with_solver(Solver::ConjugateGradient);
    let mut group = c.benchmark_group("smooth_features");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(smooth_features(&g, &x, s, &budget).unwrap())))
        });
    }
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let n = 50_000;
    let g = watts_strogatz(n, 6, 0.01, 2).unwrap();
    let y: Vec<f64> = (0..n).map(|u| (u as f64 * 0.001).sin()).collect();
    let split = SplitSpec::from_outcome(random_split(n, 0.3, 3).unwrap(), &y).unwrap();
    let s = SmoothingParam::from_omega(5.0).unwrap();
    let mut group = c.benchmark_group("label_propagation");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(label_propagation(&g, &split, s, &PropagationBudget::default()).unwrap())))
        });
    }
    group.finish();
}

fn stochastic_logdet(c: &mut Criterion) {
    let g = watts_strogatz(20_000, 6, 0.01, 4).unwrap();
    let params = synthetic_params(1, 10.0, 5).unwrap();
    let op = PrecisionOperator::new(&params, &g);
    let cfg = SlqConfig { num_probes: 16, lanczos_steps: 30, seed: 0 };
    let mut group = c.benchmark_group("slq_logdet");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(slq_logdet(&op, &cfg).unwrap())))
        });
    }
    group.finish();
}

fn stochastic_likelihood(c: &mut Criterion) {
    let n = 5_000;
    let g = watts_strogatz(n, 6, 0.01, 6).unwrap();
    let params = synthetic_params(1, 10.0, 7).unwrap();
    let a = gmrf_core::gmrf::AttributeMatrix::new(features(n, 2));
    let method = LikelihoodMethod::Stochastic(StochasticConfig {
        slq: SlqConfig { num_probes: 8, lanczos_steps: 20, seed: 0 },
        ..Default::default()
    });
    let lik = Likelihood::new(&g, &a, method).unwrap();
    let mut group = c.benchmark_group("nll_gradient_stochastic");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(lik.value_and_gradient(&params).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, smoothing, propagation, stochastic_logdet, stochastic_likelihood);
criterion_main!(benches);
