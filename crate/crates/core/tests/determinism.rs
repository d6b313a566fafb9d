//! Results must not depend on how many worker threads run them.

#![cfg(feature = "parallel")]

use gmrf_core::algorithms::{Algorithm, FeatureCache, PropagationBudget};
use gmrf_core::eval::{cross_validate, random_split, CvPlan, SplitSpec};
use gmrf_core::gmrf::{fit_with_report, sample, synthetic_params, FitConfig, LikelihoodMethod, StochasticConfig};
use gmrf_core::gmrf::Likelihood;
use gmrf_core::graph::watts_strogatz;
use gmrf_core::linalg::SlqConfig;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn cross_validation_is_thread_count_invariant() {
    let g = watts_strogatz(300, 6, 0.05, 1).unwrap();
    let params = synthetic_params(2, 10.0, 2).unwrap();
    let a = sample(&params, &g, 3).unwrap();
    let x = a.features();
    let split = SplitSpec::from_outcome(random_split(300, 0.3, 4).unwrap(), &a.outcome()).unwrap();
    let run = || {
        let cache = FeatureCache::new(&g, &x, PropagationBudget::default()).unwrap();
        format!("{:?}", cross_validate(&cache, &split, Algorithm::LgcRp, &CvPlan::default()).unwrap())
    };
    assert_eq!(in_pool(1, run), in_pool(4, run));
}

#[test]
fn stochastic_likelihood_is_thread_count_invariant() {
    let g = watts_strogatz(5000, 6, 0.05, 5).unwrap();
    let params = synthetic_params(1, 10.0, 6).unwrap();
    let a = gmrf_core::gmrf::AttributeMatrix::new(nalgebra::DMatrix::from_fn(5000, 2, |i, j| ((i * 7 + j) % 13) as f64 - 6.0));
    let method = LikelihoodMethod::Stochastic(StochasticConfig {
        slq: SlqConfig { num_probes: 8, lanczos_steps: 20, seed: 1 },
        ..Default::default()
    });
    let run = || {
        let lik = Likelihood::new(&g, &a, method).unwrap();
        format!("{:?}", lik.value_and_gradient(&params).unwrap())
    };
    assert_eq!(in_pool(1, run), in_pool(3, run));
}

#[test]
fn fit_is_thread_count_invariant() {
    let g = watts_strogatz(200, 6, 0.05, 7).unwrap();
    let params = synthetic_params(1, 5.0, 8).unwrap();
    let a = sample(&params, &g, 9).unwrap();
    let cfg = FitConfig { restarts: 4, steps: 100, learning_rate: 0.05, ..Default::default() };
    let run = || format!("{:?}", fit_with_report(&g, &a, &cfg).unwrap().trace);
    assert_eq!(in_pool(1, run), in_pool(4, run));
}
