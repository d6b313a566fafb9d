use gmrf_core::eval::{filter_response, lambda_grid, write_response_csv, FilterKind};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InputSpec};
use crate::data::{load_files, synthetic_graph};
use crate::error::CliResult;
use crate::output::slug;

const DEFAULT_OMEGAS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

fn mean_degree(cfg: &ExperimentConfig) -> CliResult<f64> {
    let g = match &cfg.input {
        InputSpec::Synthetic(s) => synthetic_graph(s, cfg.seed)?,
        InputSpec::Files(f) => load_files(&f.edges, &f.attributes)?.0,
    };
    Ok(g.degrees().iter().sum::<f64>() / g.num_nodes() as f64)
}

/// Frequency responses of the smoothing filters over `λ ∈ [0, 2]`.
pub fn cmd_spectra(cfg: &ExperimentConfig) -> CliResult<Value> {
    let settings = &cfg.spectra;
    let filters = match &settings.filters {
        Some(list) => list.clone(),
        None => {
            let degree = match settings.degree {
                Some(d) => d,
                None => mean_degree(cfg)?,
            };
            DEFAULT_OMEGAS
                .iter()
                .map(|&omega| FilterKind::Lgc { omega })
                .chain((1..=4).map(|k| FilterKind::Sgc { k, degree }))
                .collect()
        }
    };
    let lambdas = lambda_grid(settings.points);
    let mut entries = Vec::new();
    for f in &filters {
        let response = filter_response(*f, &lambdas)?;
        let file = format!("filter_{}.csv", slug(&f.label()));
        write_response_csv(cfg.output_dir.join(&file), &lambdas, &response)?;
        entries.push(json!({
            "filter": f,
            "label": f.label(),
            "response_at_0": response[0],
            "response_at_2": response[response.len() - 1],
            "file": file,
        }));
    }
    Ok(json!({"points": settings.points, "filters": entries}))
}
