use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

/// Node attributes `A = [X y]`: one row per node, one column per attribute,
/// with the outcome in the last column.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
}

impl AttributeMatrix {
    /// Wraps `values` with default column names `x0, x1, …, y`.
    pub fn new(values: DMatrix<f64>) -> Self {
        let m = values.ncols();
        let names = (0..m)
            .map(|i| if i + 1 == m { "y".to_string() } else { format!("x{i}") })
            .collect();
        Self { values, names }
    }

    pub fn with_names(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        check_len("attribute names", values.ncols(), names.len())?;
        Ok(Self { values, names })
    }

    /// Builds the matrix from its attribute-major vectorization (entry for
    /// node `u`, attribute `i` at `i·n + u`).
    pub fn from_vectorized(n: usize, num_attributes: usize, v: &[f64]) -> Result<Self> {
        check_len("vectorized attributes", n * num_attributes, v.len())?;
        Ok(Self::new(DMatrix::from_column_slice(n, num_attributes, v)))
    }

    /// Subtracts each column's mean.
    pub fn centered(mut self) -> Self {
        let n = self.values.nrows();
        if n > 0 {
            for mut col in self.values.column_iter_mut() {
                let mean = col.sum() / n as f64;
                col.add_scalar_mut(-mean);
            }
        }
        self
    }

    /// Moves the column named `name` to the outcome position (last).
    pub fn with_outcome(self, name: &str) -> Result<Self> {
        let k = self
            .names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no attribute column named `{name}`")))?;
        Ok(self.with_outcome_index(k))
    }

    /// Moves column `k` to the outcome position, keeping the other columns
    /// in order.
    pub fn with_outcome_index(self, k: usize) -> Self {
        let m = self.values.ncols();
        let order: Vec<usize> = (0..m).filter(|&i| i != k).chain(std::iter::once(k)).collect();
        let values = DMatrix::from_fn(self.values.nrows(), m, |u, i| self.values[(u, order[i])]);
        let names = order.iter().map(|&i| self.names[i].clone()).collect();
        Self { values, names }
    }

    pub fn num_nodes(&self) -> usize {
        self.values.nrows()
    }

    /// `p + 1`.
    pub fn num_attributes(&self) -> usize {
        self.values.ncols()
    }

    pub fn p(&self) -> usize {
        self.num_attributes().saturating_sub(1)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).iter().copied().collect()
    }

    /// Feature block `X` (`n × p`).
    pub fn features(&self) -> DMatrix<f64> {
        self.values.columns(0, self.p()).into_owned()
    }

    /// Outcome column `y`.
    pub fn outcome(&self) -> Vec<f64> {
        self.column(self.p())
    }

    /// `vec(A)`, attribute-major.
    pub fn vectorized(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Writes `node_id,<names…>` rows using the graph's node ids.
    pub fn write_csv(&self, path: impl AsRef<Path>, g: &Graph) -> Result<()> {
        check_len("attribute rows", g.num_nodes(), self.num_nodes())?;
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["node_id".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for u in 0..self.num_nodes() {
            let mut row = vec![g.node_id(u)];
            row.extend(self.values.row(u).iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
