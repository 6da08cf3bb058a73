//! Columnar numeric feature matrix plus named model-output columns.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Feature matrix `X` stored column-major, with one or more output vectors
/// (a single prediction column, or one score column per class).
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    outputs: Vec<(String, Vec<f64>)>,
    n: usize,
}

impl DataTable {
    /// Builds a table, checking shapes, finiteness and name uniqueness.
    pub fn new(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        outputs: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if feature_names.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidInput(
                "at least one output column is required".into(),
            ));
        }
        let n = outputs[0].1.len();
        if n == 0 {
            return Err(Error::InvalidInput("table has no rows".into()));
        }

        let mut seen = HashSet::new();
        let named = feature_names
            .iter()
            .zip(columns.iter())
            .chain(outputs.iter().map(|(name, col)| (name, col)));
        for (name, col) in named {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name `{name}`")));
            }
            if col.len() != n {
                return Err(Error::InvalidInput(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "column `{name}` row {row} is not finite"
                )));
            }
        }

        Ok(Self {
            feature_names,
            columns,
            outputs,
            n,
        })
    }

    /// Convenience constructor for a single output column.
    pub fn with_output(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        output_name: impl Into<String>,
        output: Vec<f64>,
    ) -> Result<Self> {
        Self::new(feature_names, columns, vec![(output_name.into(), output)])
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of features.
    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|(name, _)| name.as_str())
    }

    pub fn output(&self, name: &str) -> Result<&[f64]> {
        self.outputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, col)| col.as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// New table holding only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DataTable {
        let pick = |col: &Vec<f64>| rows.iter().map(|&i| col[i]).collect::<Vec<_>>();
        DataTable {
            feature_names: self.feature_names.clone(),
            columns: self.columns.iter().map(pick).collect(),
            outputs: self
                .outputs
                .iter()
                .map(|(name, col)| (name.clone(), pick(col)))
                .collect(),
            n: rows.len(),
        }
    }

    /// Appends a feature column, validating it like [`DataTable::new`].
    pub fn push_feature(&mut self, name: impl Into<String>, column: Vec<f64>) -> Result<()> {
        let mut names = self.feature_names.clone();
        let mut columns = self.columns.clone();
        names.push(name.into());
        columns.push(column);
        *self = DataTable::new(names, columns, self.outputs.clone())?;
        Ok(())
    }
}
