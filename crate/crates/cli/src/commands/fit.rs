use gmrf_core::gmrf::fit_with_report;
use gmrf_core::rng::derive_seed;
use gmrf_core::GmrfParams;
use serde_json::{json, Value};

use super::sample::params_value;
use crate::config::ExperimentConfig;
use crate::data::{load_dataset, stream, Dataset};
use crate::error::CliResult;
use crate::output::write_csv;

/// Runs the maximum-likelihood fit on every attribute column.
pub(crate) fn fit_dataset(cfg: &ExperimentConfig, data: &Dataset) -> CliResult<gmrf_core::gmrf::FitReport> {
    let fit_cfg = cfg.fit.to_core(derive_seed(cfg.seed, stream::FIT));
    Ok(fit_with_report(&data.graph, &data.attributes, &fit_cfg)?)
}

/// Relative error of `h` and agreement of off-diagonal coupling signs.
pub fn recovery(fitted: &GmrfParams, truth: &GmrfParams) -> Value {
    let m = truth.num_attributes();
    let rel: Vec<f64> = (0..m)
        .map(|i| (fitted.homophily()[i] - truth.homophily()[i]).abs() / truth.homophily()[i].abs())
        .collect();
    let (mut agree, mut total) = (0, 0);
    for i in 0..m {
        for j in 0..i {
            total += 1;
            if fitted.coupling()[(i, j)].signum() == truth.coupling()[(i, j)].signum() {
                agree += 1;
            }
        }
    }
    json!({
        "homophily_relative_error": rel,
        "mean_homophily_relative_error": rel.iter().sum::<f64>() / m as f64,
        "coupling_sign_agreement": if total == 0 { 1.0 } else { agree as f64 / total as f64 },
    })
}

pub fn cmd_fit(cfg: &ExperimentConfig) -> CliResult<Value> {
    let data = load_dataset(cfg)?;
    let report = fit_dataset(cfg, &data)?;
    let dir = &cfg.output_dir;
    report.params.save(dir.join("params.json"))?;
    write_csv(
        &dir.join("nll_trace.csv"),
        &["step", "nll"],
        report.trace.iter().enumerate().map(|(i, v)| [i.to_string(), v.to_string()]),
    )?;
    log::info!("fit finished: nll {} (restart {})", report.nll, report.best_restart);
    Ok(json!({
        "num_nodes": data.graph.num_nodes(),
        "attribute_names": data.attributes.names(),
        "nll": report.nll,
        "best_restart": report.best_restart,
        "restart_nlls": report.restart_nlls,
        "params": params_value(&report.params),
        "recovery": data.params.as_ref().map(|t| recovery(&report.params, t)),
        "files": {"params": "params.json", "nll_trace": "nll_trace.csv"},
    }))
}
