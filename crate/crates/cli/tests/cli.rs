use std::path::Path;
use std::process::{Command, Output};

use gmrf_core::GmrfParams;
use serde_json::Value;

const EXE: &str = env!("CARGO_BIN_EXE_gmrf-graphlearn");

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{cmd}.config.json"));
    std::fs::write(&path, config).unwrap();
    Command::new(EXE)
        .args([cmd, "--config", path.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap()
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(&std::fs::read_to_string(path.trim()).unwrap()).unwrap()
}

const SMALL: &str = r#"{"input": {"synthetic": {"n": 120, "avg_degree": 4, "rewire_prob": 0.1, "p": 2, "h0": 5}},
    "split": {"repeats": 2}}"#;

#[test]
fn exit_codes_follow_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let typo = r#"{"input": {"synthetic": {"n": 50, "avg_degree": 4, "rewire_prob": 0.1, "p": 1, "h0": 1}}, "repeets": 3}"#;
    assert_eq!(run(dir.path(), "evaluate", typo, &[]).status.code(), Some(1));

    let missing = r#"{"input": {"files": {"edges": "/nonexistent/edges.csv", "attributes": "/nonexistent/a.csv"}}}"#;
    assert_eq!(run(dir.path(), "evaluate", missing, &[]).status.code(), Some(2));

    // A constant outcome centers to zero, leaving R² undefined.
    std::fs::write(dir.path().join("e.csv"), "0,1\n1,2\n2,3\n3,0\n").unwrap();
    std::fs::write(dir.path().join("a.csv"), "node_id,x,y\n0,1,5\n1,2,5\n2,-1,5\n3,0.5,5\n").unwrap();
    let constant = format!(
        r#"{{"input": {{"files": {{"edges": "{0}/e.csv", "attributes": "{0}/a.csv"}}}},
            "algorithms": ["LR"], "hyperparameters": {{}}, "split": {{"train_fraction": 0.5}}}}"#,
        dir.path().display()
    );
    let out = run(dir.path(), "evaluate", &constant, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let bad_threads = Command::new(EXE)
        .args(["spectra", "--config", dir.path().join("evaluate.config.json").to_str().unwrap()])
        .env("GMRF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));
}

#[test]
fn sample_then_fit_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let sampled = summary(&run(
        dir.path(),
        "sample",
        r#"{"input": {"synthetic": {"n": 1000, "avg_degree": 6, "rewire_prob": 0.05, "p": 1, "h0": 10}}, "seed": 3}"#,
        &[],
    ));
    assert_eq!(sampled["num_nodes"], 1000);
    let out = dir.path().join("out");
    let truth = GmrfParams::load(out.join("params.json")).unwrap();

    let fit_dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"input": {{"files": {{"edges": "{0}/edges.csv", "attributes": "{0}/attributes.csv"}}}},
            "fit": {{"restarts": 4, "steps": 1500, "learning_rate": 0.02}}}}"#,
        out.display()
    );
    let fitted = summary(&run(fit_dir.path(), "fit", &config, &[]));
    assert!(fitted["recovery"].is_null());
    let est = GmrfParams::load(fit_dir.path().join("out/params.json")).unwrap();
    // The coupling diagonal is weakly identified next to strong homophily, so
    // recovery is judged on h and on the off-diagonal sign pattern.
    for i in 0..2 {
        let rel = (est.homophily()[i] - truth.homophily()[i]).abs() / truth.homophily()[i];
        assert!(rel < 0.2, "h[{i}]: {est:?} vs {truth:?}");
    }
    assert_eq!(est.coupling()[(0, 1)].signum(), truth.coupling()[(0, 1)].signum());
    let trace = std::fs::read_to_string(fit_dir.path().join("out/nll_trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("step,nll"));
}

#[test]
fn summaries_echo_version_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), "evaluate", SMALL, &["--seed", "9"]));
    assert_eq!(s["spec_version"], gmrf_graphlearn::output::SPEC_VERSION);
    assert_eq!(s["command"], "evaluate");
    assert_eq!(s["config"]["seed"], 9);
    assert_eq!(s["config"]["cv"]["folds"], 5);
    assert_eq!(s["algorithms"].as_array().unwrap().len(), 6);
    let runs = std::fs::read_to_string(dir.path().join("out/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 6);
}

#[test]
fn predict_writes_classes_for_binary_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    summary(&run(dir.path(), "sample", SMALL, &[]));
    let out = dir.path().join("out");
    // Replace the outcome by its sign.
    let text = std::fs::read_to_string(out.join("attributes.csv")).unwrap();
    let mut lines = text.lines();
    let mut binary = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let mut fields: Vec<String> = line.split(',').map(str::to_string).collect();
        let y: f64 = fields.last().unwrap().parse().unwrap();
        *fields.last_mut().unwrap() = if y > 0.0 { "1".into() } else { "0".into() };
        binary.push_str(&fields.join(","));
        binary.push('\n');
    }
    std::fs::write(dir.path().join("binary.csv"), binary).unwrap();

    let pdir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"input": {{"files": {{"edges": "{0}/edges.csv", "attributes": "{1}"}}}},
            "algorithms": ["LP", "LGC/RP"], "cv": {{"metric": "f1"}}}}"#,
        out.display(),
        dir.path().join("binary.csv").display()
    );
    let s = summary(&run(pdir.path(), "predict", &config, &[]));
    for entry in s["predictions"].as_array().unwrap() {
        assert!(entry["threshold"].is_number());
        let f1 = entry["test_score"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f1));
        let csv = std::fs::read_to_string(pdir.path().join("out").join(entry["file"].as_str().unwrap())).unwrap();
        assert_eq!(csv.lines().next(), Some("node_id,prediction,class"));
        assert_eq!(csv.lines().count(), 1 + 84);
    }
}

#[test]
fn inductive_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"input": {"synthetic": {"n": 150, "avg_degree": 4, "rewire_prob": 0.1, "p": 2, "h0": 5}},
        "split": {"repeats": 2, "inductive": {}}, "algorithms": ["LR", "LGC", "SGC"]}"#;
    let s = summary(&run(dir.path(), "evaluate", config, &[]));
    assert_eq!(s["mode"], "inductive");
    for a in s["algorithms"].as_array().unwrap() {
        assert!(a["mean"].as_f64().unwrap().is_finite());
    }
    let with_lp = config.replace(r#"["LR", "LGC", "SGC"]"#, r#"["LP"]"#);
    assert_eq!(run(dir.path(), "evaluate", &with_lp, &[]).status.code(), Some(1));
}

#[test]
fn estimate_and_spectra_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), "estimate-r2", SMALL, &[]));
    assert_eq!(s["params_source"], "known");
    let algs = s["outcomes"][0]["algorithms"].as_array().unwrap();
    let names: Vec<&str> = algs.iter().map(|a| a["algorithm"].as_str().unwrap()).collect();
    assert_eq!(names, ["LP", "LGC", "LGC/RP"]);

    let config = r#"{"input": {"synthetic": {"n": 50, "avg_degree": 4, "rewire_prob": 0.1, "p": 0, "h0": 1}},
        "spectra": {"points": 11, "filters": [{"kind": "sgc", "k": 2, "degree": 6}, {"kind": "lgc", "omega": 3}]}}"#;
    let s = summary(&run(dir.path(), "spectra", config, &[]));
    let filters = s["filters"].as_array().unwrap();
    assert_eq!(filters.len(), 2);
    assert_eq!(filters[0]["response_at_2"].as_f64().unwrap(), (5.0f64 / 7.0).powi(2));
    let csv = std::fs::read_to_string(dir.path().join("out").join(filters[1]["file"].as_str().unwrap())).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert_eq!(csv.lines().next(), Some("lambda,response"));
}
