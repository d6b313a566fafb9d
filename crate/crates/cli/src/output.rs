//! Summary JSON and CSV writers.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Version of the output layout, stamped into every summary.
pub const SPEC_VERSION: &str = "1.0.0";

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

/// Wraps a command's results with the version, command name and the
/// resolved configuration.
pub fn summary(command: &str, cfg: &ExperimentConfig, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("spec_version".into(), json!(SPEC_VERSION));
    map.insert("command".into(), json!(command));
    map.insert("config".into(), cfg.to_json_value());
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("results".into(), other);
        }
    }
    Value::Object(map)
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// File-name-safe form of an algorithm or filter label.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            'a'..='z' | '0'..='9' | '.' => out.push(c),
            'A'..='Z' => out.push(c.to_ascii_lowercase()),
            '-' => out.push('-'),
            _ if !out.ends_with('_') => out.push('_'),
            _ => {}
        }
    }
    out.trim_matches('_').to_string()
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}
