use gmrf_core::algorithms::{classify_by_threshold, FeatureCache};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::data::{load_dataset, outcome_columns, run_algorithm, Task};
use crate::error::CliResult;
use crate::output::{slug, write_csv};

/// Predicts the first configured outcome on the first split, one CSV per
/// algorithm with a row per scored node.
pub fn cmd_predict(cfg: &ExperimentConfig) -> CliResult<Value> {
    let data = load_dataset(cfg)?;
    let column = outcome_columns(&cfg.outcome, data.attributes.names())?[0];
    let task = Task::new(&data, column)?;
    let case = task.split_case(cfg.split.train_fraction, cfg.seed, 0)?;
    let cache = FeatureCache::new(&task.graph, &task.features, cfg.propagation.budget())?;
    let mut results = Vec::new();
    for &alg in &cfg.algorithms {
        let run = run_algorithm(cfg, &cache, &task, &case, alg, 0)?;
        let values = case.eval_values(&run.prediction.values);
        let file = format!("predictions_{}.csv", slug(alg.name()));
        let ids: Vec<String> = case.eval_nodes.iter().map(|&u| task.graph.node_id(u)).collect();
        match run.threshold {
            Some(t) => {
                let classes = classify_by_threshold(&values, t);
                write_csv(
                    &cfg.output_dir.join(&file),
                    &["node_id", "prediction", "class"],
                    ids.iter().zip(&values).zip(&classes).map(|((id, v), c)| {
                        [id.clone(), v.to_string(), (*c as u8).to_string()]
                    }),
                )?;
            }
            None => write_csv(
                &cfg.output_dir.join(&file),
                &["node_id", "prediction"],
                ids.iter().zip(&values).map(|(id, v)| [id.clone(), v.to_string()]),
            )?,
        }
        results.push(json!({
            "algorithm": alg,
            "hyperparameters": run.hyper,
            "cv_score": run.cv_score,
            "threshold": run.threshold,
            "test_score": run.score,
            "beta": run.prediction.beta,
            "converged": run.prediction.converged,
            "file": file,
        }));
    }
    Ok(json!({
        "outcome": task.outcome_name,
        "metric": cfg.cv.metric,
        "num_labeled": case.split.labeled().len(),
        "num_scored": case.eval_nodes.len(),
        "predictions": results,
    }))
}
