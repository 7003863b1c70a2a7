//! Columnar numeric dataset.

use crate::error::{Error, Result};
use std::collections::HashSet;

/// Named, equal-length, finite `f64` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n: usize,
}

impl DataTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidData("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate column `{name}`")));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value in column `{name}` at row {row}"
                )));
            }
        }
        Ok(Self { names, columns, n })
    }

    /// A zero-row table with the given columns.
    pub fn empty(names: Vec<String>) -> Result<Self> {
        let columns = vec![Vec::new(); names.len()];
        Self::new(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Returns a copy with `name` added, or replaced if it already exists.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Self> {
        let mut names = self.names.clone();
        let mut columns = self.columns.clone();
        match names.iter().position(|n| n == name) {
            Some(i) => columns[i] = values,
            None => {
                names.push(name.to_string());
                columns.push(values);
            }
        }
        if self.n_cols() > 0 && columns.iter().any(|c| c.len() != self.n) {
            return Err(Error::InvalidData(format!(
                "column `{name}` must have {} rows",
                self.n
            )));
        }
        Self::new(names, columns)
    }

    /// The column, checked to contain only 0 and 1.
    pub fn binary_column(&self, name: &str) -> Result<&[f64]> {
        let col = self.column(name)?;
        if col.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::NotBinary {
                column: name.to_string(),
            });
        }
        Ok(col)
    }
}
