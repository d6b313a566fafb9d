use gmrf_core::gmrf::sample;
use gmrf_core::graph::Graph;
use gmrf_core::rng::derive_seed;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InputSpec};
use crate::data::{load_files, stream, synthetic_graph, synthetic_model};
use crate::error::{CliError, CliResult};
use crate::output::write_csv;

pub(crate) fn params_value(params: &gmrf_core::GmrfParams) -> Value {
    serde_json::from_str(&params.to_json()).expect("parameter JSON parses")
}

pub(crate) fn write_edges(path: &std::path::Path, g: &Graph) -> CliResult<()> {
    write_csv(
        path,
        &["src", "dst", "weight"],
        g.edges().map(|(u, v, w)| [g.node_id(u), g.node_id(v), w.to_string()]),
    )
}

/// Samples attributes from the model: on a Watts-Strogatz graph for
/// synthetic input, or on the given graph with the given parameters.
pub fn cmd_sample(cfg: &ExperimentConfig) -> CliResult<Value> {
    let (graph, params) = match &cfg.input {
        InputSpec::Synthetic(s) => (synthetic_graph(s, cfg.seed)?, synthetic_model(s, cfg.seed)?),
        InputSpec::Files(f) => {
            let path = f
                .params
                .as_ref()
                .ok_or_else(|| CliError::Config("sampling from file input needs a params file".into()))?;
            let (graph, _) = load_files(&f.edges, &f.attributes)?;
            (graph, gmrf_core::GmrfParams::load(path)?)
        }
    };
    let attributes = sample(&params, &graph, derive_seed(cfg.seed, stream::SAMPLE))?;
    let dir = &cfg.output_dir;
    write_edges(&dir.join("edges.csv"), &graph)?;
    attributes.write_csv(dir.join("attributes.csv"), &graph)?;
    params.save(dir.join("params.json"))?;
    log::info!("sampled {} nodes x {} attributes", graph.num_nodes(), params.num_attributes());
    Ok(json!({
        "num_nodes": graph.num_nodes(),
        "num_edges": graph.num_edges(),
        "attribute_names": attributes.names(),
        "params": params_value(&params),
        "files": {"edges": "edges.csv", "attributes": "attributes.csv", "params": "params.json"},
    }))
}
