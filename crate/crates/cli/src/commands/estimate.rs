use gmrf_core::algorithms::{Algorithm, FeatureCache};
use gmrf_core::eval::{r_squared, CovarianceModel, Metric};
use gmrf_core::gmrf::AttributeMatrix;
use gmrf_core::parallel::map_indexed;
use gmrf_core::GmrfParams;
use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::fit::fit_dataset;
use super::sample::params_value;
use crate::config::{ExperimentConfig, ParamsSource};
use crate::data::{load_dataset, outcome_columns, params_with_outcome, run_algorithm, Task};
use crate::error::{CliError, CliResult};
use crate::output::{mean_std, write_csv};

const ESTIMABLE: [Algorithm; 3] = [Algorithm::Lp, Algorithm::Lgc, Algorithm::LgcRp];

struct Row {
    repeat: usize,
    algorithm: Algorithm,
    estimate: f64,
    empirical: f64,
    oracle: f64,
}

/// Analytic R² of LP, LGC and LGC/RP from model parameters, next to the
/// empirical R² of the tuned algorithm and of the exact conditional mean.
pub fn cmd_estimate_r2(cfg: &ExperimentConfig) -> CliResult<Value> {
    if cfg.cv.metric != Metric::R2 {
        return Err(CliError::Config("estimate-r2 compares R², set cv.metric to \"r2\"".into()));
    }
    let data = load_dataset(cfg)?;
    if data.train.is_some() {
        return Err(CliError::Config("estimate-r2 is transductive only".into()));
    }
    let algorithms: Vec<Algorithm> = cfg.algorithms.iter().copied().filter(|a| ESTIMABLE.contains(a)).collect();
    if algorithms.is_empty() {
        return Err(CliError::Config("estimate-r2 needs at least one of LP, LGC, LGC/RP".into()));
    }
    let (params, source) = match (cfg.estimate.params, &data.params) {
        (ParamsSource::Auto | ParamsSource::Known, Some(p)) => (p.clone(), "known"),
        (ParamsSource::Known, None) => return Err(CliError::Config("no known parameters for this input".into())),
        (ParamsSource::Auto | ParamsSource::Fit, _) => (fit_dataset(cfg, &data)?.params, "fit"),
    };

    let columns = outcome_columns(&cfg.outcome, data.attributes.names())?;
    let mut csv_rows = Vec::new();
    let mut outcomes = Vec::new();
    for &column in &columns {
        let task = Task::new(&data, column)?;
        let model_params: GmrfParams = params_with_outcome(&params, column)?;
        let model = CovarianceModel::new(&model_params, &task.graph)?;
        let cache = FeatureCache::new(&task.graph, &task.features, cfg.propagation.budget())?;
        let n = task.num_nodes();
        let sample = AttributeMatrix::new(DMatrix::from_fn(n, task.features.ncols() + 1, |u, i| {
            if i < task.features.ncols() {
                task.features[(u, i)]
            } else {
                task.outcome[u]
            }
        }));
        let per_repeat = map_indexed(cfg.split.repeats, |r| -> CliResult<Vec<Row>> {
            let case = task.split_case(cfg.split.train_fraction, cfg.seed, r)?;
            let actual = case.eval_targets(&task);
            algorithms
                .iter()
                .map(|&algorithm| {
                    let estimate = model.estimate_r2(&case.split, algorithm)?;
                    let run = run_algorithm(cfg, &cache, &task, &case, algorithm, r)?;
                    let oracle = model.oracle_prediction(&case.split, algorithm, &sample)?;
                    let oracle = r_squared(&case.eval_values(&oracle), &actual)?;
                    Ok(Row { repeat: r, algorithm, estimate, empirical: run.score, oracle })
                })
                .collect()
        });
        let mut rows = Vec::new();
        for r in per_repeat {
            rows.extend(r?);
        }
        let per_alg: Vec<Value> = algorithms
            .iter()
            .map(|&alg| {
                let mine: Vec<&Row> = rows.iter().filter(|r| r.algorithm == alg).collect();
                let col = |f: fn(&Row) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<f64>>();
                let (est, emp, ora) = (col(|r| r.estimate), col(|r| r.empirical), col(|r| r.oracle));
                let mae = |other: &[f64]| est.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>() / est.len() as f64;
                json!({
                    "algorithm": alg,
                    "mean_estimate": mean_std(&est).0,
                    "mean_empirical": mean_std(&emp).0,
                    "mean_oracle": mean_std(&ora).0,
                    "mean_abs_error": mae(&emp),
                    "mean_abs_error_oracle": mae(&ora),
                    "estimates": est,
                    "empirical": emp,
                    "oracle": ora,
                })
            })
            .collect();
        for r in &rows {
            csv_rows.push([
                task.outcome_name.clone(),
                r.repeat.to_string(),
                r.algorithm.name().to_string(),
                r.estimate.to_string(),
                r.empirical.to_string(),
                r.oracle.to_string(),
            ]);
        }
        outcomes.push(json!({"outcome": task.outcome_name, "algorithms": per_alg}));
    }
    write_csv(
        &cfg.output_dir.join("estimates.csv"),
        &["outcome", "repeat", "algorithm", "estimate", "empirical", "oracle"],
        csv_rows,
    )?;
    Ok(json!({
        "params_source": source,
        "params": params_value(&params),
        "outcomes": outcomes,
        "files": {"estimates": "estimates.csv"},
    }))
}
