//! Variable metadata, the observation matrix and CSV I/O.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("variable {name}: {reason}")]
    InvalidMeta { name: String, reason: String },
    #[error("dataset has {cols} columns but {meta} variables were declared")]
    ShapeMismatch { cols: usize, meta: usize },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("CSV row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("CSV has no data rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Name and summary statistics for one variable, in natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub nonnegative: bool,
}

impl VariableMeta {
    pub fn new(name: impl Into<String>, mean: f64, sd: f64, min: f64, max: f64) -> Self {
        VariableMeta {
            name: name.into(),
            mean,
            sd,
            min,
            max,
            nonnegative: min >= 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |reason: &str| {
            Err(DataError::InvalidMeta {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if !(self.sd > 0.0) || !self.sd.is_finite() {
            return fail("sd must be positive and finite");
        }
        if !(self.min <= self.mean && self.mean <= self.max) {
            return fail("mean must lie within [min, max]");
        }
        if self.nonnegative && self.min < 0.0 {
            return fail("nonnegative variable has a negative minimum");
        }
        Ok(())
    }

    /// Natural-unit level for a Z score.
    pub fn level(&self, z: f64) -> f64 {
        self.mean + z * self.sd
    }
}

/// An n × p observation matrix with one [`VariableMeta`] per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub meta: Vec<VariableMeta>,
    pub rows: Matrix,
}

impl Dataset {
    pub fn new(meta: Vec<VariableMeta>, rows: Matrix) -> Result<Self, DataError> {
        if rows.cols() != meta.len() {
            return Err(DataError::ShapeMismatch {
                cols: rows.cols(),
                meta: meta.len(),
            });
        }
        for (i, m) in meta.iter().enumerate() {
            if meta[..i].iter().any(|o| o.name == m.name) {
                return Err(DataError::DuplicateVariable(m.name.clone()));
            }
        }
        Ok(Dataset { meta, rows })
    }

    /// Builds a dataset from raw columns, deriving metadata from the sample.
    pub fn from_columns(names: &[String], columns: &[Vec<f64>]) -> Result<Self, DataError> {
        let meta = names
            .iter()
            .zip(columns)
            .map(|(name, col)| sample_meta(name, col))
            .collect();
        Dataset::new(meta, Matrix::from_columns(columns))
    }

    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    pub fn p(&self) -> usize {
        self.meta.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.meta.iter().map(|m| m.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, DataError> {
        self.meta
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| DataError::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.column(j)
    }

    /// Writes a header row of variable names followed by one row per observation.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DataError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.meta.iter().map(|m| m.name.as_str()))?;
        for i in 0..self.n() {
            out.write_record(self.rows.row(i).iter().map(|v| v.to_string()))?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a headed CSV. Metadata comes from the sample itself; values are not clipped.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| DataError::BadNumber {
                    row: row + 1,
                    column: names[j].clone(),
                    value: field.to_string(),
                })?;
                columns[j].push(v);
            }
        }
        if columns.first().is_none_or(Vec::is_empty) {
            return Err(DataError::Empty);
        }
        Dataset::from_columns(&names, &columns)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the n − 1 denominator.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

fn sample_meta(name: &str, col: &[f64]) -> VariableMeta {
    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    VariableMeta {
        name: name.to_string(),
        mean: mean(col),
        sd: sample_sd(col),
        min,
        max,
        nonnegative: false,
    }
}
