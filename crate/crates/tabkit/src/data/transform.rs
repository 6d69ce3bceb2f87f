//! Missing-value imputation and z-score standardization.

use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::numkit::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputePolicy {
    /// Numeric columns take their mean; categorical columns take their mode.
    Mean,
    /// Numeric columns take their median; categorical columns take their mode.
    Median,
    /// Every column takes its most frequent value (ties: smallest value).
    Mode,
}

fn mode(observed: &[f64]) -> f64 {
    let mut sorted = observed.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = sorted[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let count = j - i + 1;
        if count > best_count {
            best = sorted[i];
            best_count = count;
        }
        i = j + 1;
    }
    best
}

/// Fill NaN cells in place. Returns (column name, fill value) for every
/// column that actually had something to fill.
pub fn impute_missing(ds: &mut Dataset, policy: ImputePolicy) -> Result<Vec<(String, f64)>> {
    let mut applied = Vec::new();
    for j in 0..ds.n_cols() {
        let col = ds.data.col(j);
        let observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
        if observed.len() == col.len() {
            continue;
        }
        if observed.is_empty() {
            return Err(Error::AllMissingColumn(ds.columns[j].name.clone()));
        }
        let fill = match (&ds.columns[j].kind, policy) {
            (ColumnKind::Categorical { .. }, _) | (_, ImputePolicy::Mode) => mode(&observed),
            (ColumnKind::Numeric { .. }, ImputePolicy::Mean) => stats::mean(&observed),
            (ColumnKind::Numeric { .. }, ImputePolicy::Median) => stats::median(&observed),
        };
        for i in 0..ds.n_rows() {
            if ds.data.get(i, j).is_nan() {
                ds.data.set(i, j, fill);
            }
        }
        applied.push((ds.columns[j].name.clone(), fill));
    }
    Ok(applied)
}

/// Per-column centering/scaling parameters, reusable on held-out data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Z-score columns in place using the population std; a constant column is
/// centered but not scaled (its stored std is 1). Defaults to every numeric
/// non-target column. Naming a categorical column is an error.
pub fn standardize(ds: &mut Dataset, columns: Option<&[String]>) -> Result<Scaler> {
    let names: Vec<String> = match columns {
        Some(cs) => cs.to_vec(),
        None => ds
            .columns
            .iter()
            .enumerate()
            .filter(|(j, c)| Some(*j) != ds.target && !c.kind.is_categorical())
            .map(|(_, c)| c.name.clone())
            .collect(),
    };
    let mut means = Vec::with_capacity(names.len());
    let mut stds = Vec::with_capacity(names.len());
    for name in &names {
        let j = ds.column_index(name)?;
        if ds.columns[j].kind.is_categorical() {
            return Err(Error::Data(format!(
                "cannot standardize categorical column {name}"
            )));
        }
        let col = ds.data.col(j);
        if col.iter().any(|v| v.is_nan()) {
            return Err(Error::Data(format!(
                "column {name} has missing values; impute before standardizing"
            )));
        }
        let m = stats::mean(&col);
        let s = stats::population_std(&col);
        let s = if s == 0.0 { 1.0 } else { s };
        for i in 0..ds.n_rows() {
            ds.data.set(i, j, (ds.data.get(i, j) - m) / s);
        }
        means.push(m);
        stds.push(s);
    }
    Ok(Scaler {
        columns: names,
        means,
        stds,
    })
}

/// Apply a fitted scaler to another dataset in place.
pub fn apply_scaler(ds: &mut Dataset, s: &Scaler) -> Result<()> {
    for (k, name) in s.columns.iter().enumerate() {
        let j = ds.column_index(name)?;
        for i in 0..ds.n_rows() {
            ds.data.set(i, j, (ds.data.get(i, j) - s.means[k]) / s.stds[k]);
        }
    }
    Ok(())
}

/// Undo a scaler in place.
pub fn invert_scaler(ds: &mut Dataset, s: &Scaler) -> Result<()> {
    for (k, name) in s.columns.iter().enumerate() {
        let j = ds.column_index(name)?;
        for i in 0..ds.n_rows() {
            ds.data.set(i, j, ds.data.get(i, j) * s.stds[k] + s.means[k]);
        }
    }
    Ok(())
}
