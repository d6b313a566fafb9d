use gmrf_core::algorithms::{Algorithm, FeatureCache, Hyperparameters};
use gmrf_core::parallel::map_indexed;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::data::{load_dataset, outcome_columns, run_algorithm, Task};
use crate::error::CliResult;
use crate::output::{mean_std, write_csv};

fn alpha(omega: f64) -> f64 {
    omega / (1.0 + omega)
}

/// One (outcome, repeat, algorithm) result.
#[derive(Debug, Clone)]
struct Record {
    outcome: usize,
    repeat: usize,
    algorithm: Algorithm,
    score: f64,
    cv_score: Option<f64>,
    hyper: Hyperparameters,
}

impl Record {
    fn feature_alpha(&self) -> Option<f64> {
        matches!(self.algorithm, Algorithm::Lp | Algorithm::Lgc | Algorithm::LgcRp).then(|| alpha(self.hyper.omega))
    }

    fn rp_alpha(&self) -> Option<f64> {
        matches!(self.algorithm, Algorithm::LgcRp | Algorithm::SgcRp)
            .then(|| alpha(self.hyper.rp_omega.unwrap_or(self.hyper.omega)))
    }

    fn k(&self) -> Option<usize> {
        self.algorithm.uses_k().then_some(self.hyper.k)
    }
}

fn mean_of<I: Iterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn aggregate(records: &[&Record]) -> Value {
    let scores: Vec<f64> = records.iter().map(|r| r.score).collect();
    let (mean, std) = mean_std(&scores);
    json!({
        "mean": mean,
        "std": std,
        "runs": scores.len(),
        "mean_alpha": mean_of(records.iter().map(|r| r.feature_alpha())),
        "mean_k": mean_of(records.iter().map(|r| r.k().map(|k| k as f64))),
        "mean_rp_alpha": mean_of(records.iter().map(|r| r.rp_alpha())),
    })
}

/// Mean and standard deviation of the test score per algorithm over every
/// outcome and repeat, with the chosen smoothing levels.
pub fn cmd_evaluate(cfg: &ExperimentConfig) -> CliResult<Value> {
    let data = load_dataset(cfg)?;
    let columns = outcome_columns(&cfg.outcome, data.attributes.names())?;
    let mut records = Vec::new();
    let mut names = Vec::new();
    for (oi, &column) in columns.iter().enumerate() {
        let task = Task::new(&data, column)?;
        log::info!("evaluating outcome `{}`", task.outcome_name);
        let cache = FeatureCache::new(&task.graph, &task.features, cfg.propagation.budget())?;
        let per_repeat = map_indexed(cfg.split.repeats, |r| -> CliResult<Vec<Record>> {
            let case = task.split_case(cfg.split.train_fraction, cfg.seed, r)?;
            cfg.algorithms
                .iter()
                .map(|&algorithm| {
                    let run = run_algorithm(cfg, &cache, &task, &case, algorithm, r)?;
                    Ok(Record { outcome: oi, repeat: r, algorithm, score: run.score, cv_score: run.cv_score, hyper: run.hyper })
                })
                .collect()
        });
        for rows in per_repeat {
            records.extend(rows?);
        }
        names.push(task.outcome_name);
    }

    write_csv(
        &cfg.output_dir.join("runs.csv"),
        &["outcome", "repeat", "algorithm", "score", "cv_score", "omega", "k", "rp_omega"],
        records.iter().map(|r| {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            [
                names[r.outcome].clone(),
                r.repeat.to_string(),
                r.algorithm.name().to_string(),
                r.score.to_string(),
                opt(r.cv_score),
                r.hyper.omega.to_string(),
                r.hyper.k.to_string(),
                opt(r.hyper.rp_omega),
            ]
        }),
    )?;

    let algorithms: Vec<Value> = cfg
        .algorithms
        .iter()
        .map(|&alg| {
            let mine: Vec<&Record> = records.iter().filter(|r| r.algorithm == alg).collect();
            let per_outcome: Vec<Value> = names
                .iter()
                .enumerate()
                .map(|(oi, name)| {
                    let rows: Vec<&Record> = mine.iter().copied().filter(|r| r.outcome == oi).collect();
                    let mut v = aggregate(&rows);
                    v["outcome"] = json!(name);
                    v["scores"] = json!(rows.iter().map(|r| r.score).collect::<Vec<_>>());
                    v
                })
                .collect();
            let mut v = aggregate(&mine);
            v["algorithm"] = json!(alg);
            v["per_outcome"] = json!(per_outcome);
            v
        })
        .collect();
    Ok(json!({
        "metric": cfg.cv.metric,
        "mode": if data.train.is_some() { "inductive" } else { "transductive" },
        "outcomes": names,
        "repeats": cfg.split.repeats,
        "algorithms": algorithms,
        "files": {"runs": "runs.csv"},
    }))
}
