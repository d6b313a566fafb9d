use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use super::Graph;
use crate::error::{Error, Result};
use crate::gmrf::AttributeMatrix;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn reader(path: &Path, has_headers: bool) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

/// Reads an undirected edge list with rows `src,dst[,weight]`.
///
/// Node ids are arbitrary strings, mapped to dense indices in order of first
/// appearance and kept on the graph (see [`Graph::node_id`]). Weight defaults
/// to 1; repeated edges merge by summing weights. Lines starting with `#` are
/// comments, and a leading `src,dst[,weight]` header row is skipped.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();

    for (row, record) in reader(path, false)?.records().enumerate() {
        let record = record?;
        let line = line_of(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if row == 0 && record.get(0) == Some("src") && record.get(1) == Some("dst") {
            continue;
        }
        if !(2..=3).contains(&record.len()) {
            return Err(parse_error(path, line, format!("expected 2 or 3 fields, found {}", record.len())));
        }
        let weight = match record.get(2) {
            Some(field) => field
                .parse::<f64>()
                .map_err(|_| parse_error(path, line, format!("non-numeric weight `{field}`")))?,
            None => 1.0,
        };
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(parse_error(path, line, format!("invalid weight {weight}")));
        }
        let mut endpoint = |id: &str| {
            if id.is_empty() {
                return Err(parse_error(path, line, "empty node id"));
            }
            Ok(*index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            }))
        };
        let u = endpoint(&record[0])?;
        let v = endpoint(&record[1])?;
        if u == v {
            return Err(parse_error(path, line, format!("self-loop on node `{}`", &record[0])));
        }
        edges.push((u, v, weight));
    }

    Graph::from_edges(ids.len(), edges)?.with_node_ids(ids)
}

/// Reads a node attribute table `node_id,attr_1,...,attr_k` (header row
/// required) and centers every column.
///
/// Every node of `g` must have exactly one row; ids are matched against
/// [`Graph::node_id`]. Column order is kept, so by default the last column is
/// treated as the outcome (see [`AttributeMatrix::with_outcome`]).
pub fn load_attributes(path: impl AsRef<Path>, g: &Graph) -> Result<AttributeMatrix> {
    let path = path.as_ref();
    let mut rdr = reader(path, true)?;
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(parse_error(path, 1, "header needs a node id column and at least one attribute"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let k = names.len();

    let index: HashMap<String, usize> = (0..g.num_nodes()).map(|u| (g.node_id(u), u)).collect();
    let mut values = DMatrix::<f64>::zeros(g.num_nodes(), k);
    let mut seen = vec![false; g.num_nodes()];

    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != k + 1 {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {} (missing attribute cell?)", k + 1, record.len()),
            ));
        }
        let id = &record[0];
        let &u = index.get(id).ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        if std::mem::replace(&mut seen[u], true) {
            return Err(parse_error(path, line, format!("duplicate row for node `{id}`")));
        }
        for (i, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                return Err(parse_error(path, line, format!("missing value for `{}`", names[i])));
            }
            let x: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, format!("non-numeric value `{field}`")))?;
            if !x.is_finite() {
                return Err(parse_error(path, line, format!("non-finite value `{field}`")));
            }
            values[(u, i)] = x;
        }
    }

    if let Some(u) = seen.iter().position(|&s| !s) {
        return Err(parse_error(path, 0, format!("no attribute row for node `{}`", g.node_id(u))));
    }
    Ok(AttributeMatrix::with_names(values, names)?.centered())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn path_from_edge_list() {
        let f = file("0,1\n1,2\n");
        let g = load_edge_list(f.path()).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(g.node_id(2), "2");
    }

    #[test]
    fn duplicate_rows_merge() {
        let f = file("src,dst,weight\n0,1,1\n0,1,1\n");
        let g = load_edge_list(f.path()).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 2.0)]);
    }

    #[test]
    fn string_ids_keep_first_appearance_order() {
        let f = file("# comment\nb,a\na,c,0.5\n");
        let g = load_edge_list(f.path()).unwrap();
        assert_eq!(g.node_ids().unwrap(), &["b", "a", "c"]);
        assert_eq!(g.degree(1), 1.5);
    }

    #[test]
    fn bad_edge_rows() {
        assert!(matches!(load_edge_list(file("0,1,x\n").path()), Err(Error::Parse { .. })));
        assert!(load_edge_list(file("0\n").path()).is_err());
        assert!(load_edge_list(file("0,0\n").path()).is_err());
    }

    #[test]
    fn attributes_are_centered() {
        let g = load_edge_list(file("0,1\n1,2\n").path()).unwrap();
        let a = load_attributes(file("node,x\n2,3\n0,1\n1,2\n").path(), &g).unwrap();
        assert_eq!(a.column(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(a.names(), &["x"]);
    }

    #[test]
    fn attribute_errors() {
        let g = load_edge_list(file("0,1\n1,2\n").path()).unwrap();
        let unknown = load_attributes(file("node,x\n0,1\n1,2\n2,3\n9,4\n").path(), &g);
        assert!(matches!(unknown, Err(Error::UnknownNode(id)) if id == "9"));
        let non_numeric = load_attributes(file("node,x\n0,1\n1,abc\n2,3\n").path(), &g);
        assert!(matches!(non_numeric, Err(Error::Parse { .. })));
        let missing_cell = load_attributes(file("node,x,y\n0,1,1\n1,2\n2,3,3\n").path(), &g);
        assert!(matches!(missing_cell, Err(Error::Parse { .. })));
        let empty_cell = load_attributes(file("node,x,y\n0,1,1\n1,2,\n2,3,3\n").path(), &g);
        assert!(matches!(empty_cell, Err(Error::Parse { .. })));
        let missing_row = load_attributes(file("node,x\n0,1\n1,2\n").path(), &g);
        assert!(missing_row.is_err());
    }
}
