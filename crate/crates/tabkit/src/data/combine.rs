//! Column operations and dataset combination.

use crate::data::{ColumnKind, ColumnMeta, Dataset};
use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Positional merge: equal row counts required, columns concatenated.
/// The left target (if any) is kept; duplicate names are an error.
pub fn merge_positional(left: &Dataset, right: &Dataset) -> Result<Dataset> {
    if left.n_rows() != right.n_rows() {
        return Err(Error::MergeLengthMismatch {
            left: left.n_rows(),
            right: right.n_rows(),
        });
    }
    for c in &right.columns {
        if left.columns.iter().any(|l| l.name == c.name) {
            return Err(Error::DuplicateColumn(c.name.clone()));
        }
    }
    let mut columns = left.columns.clone();
    columns.extend(right.columns.iter().cloned());
    let data = left.data.hstack(&right.data)?;
    Dataset::new(columns, data, left.target)
}

fn cell_key(ds: &Dataset, col: usize, row: usize) -> Option<String> {
    let v = ds.data.get(row, col);
    if v.is_nan() {
        return None;
    }
    match &ds.columns[col].kind {
        ColumnKind::Categorical { categories } => categories.get(v as usize).cloned(),
        ColumnKind::Numeric { .. } => Some(v.to_string()),
    }
}

/// Inner join on a key column present in both sides. Matched pairs produce
/// one output row each (left row order, then right match order); the key is
/// kept once, typed as on the left. Missing keys never match.
pub fn join_on(left: &Dataset, right: &Dataset, key: &str) -> Result<Dataset> {
    let lk = left.column_index(key)?;
    let rk = right.column_index(key)?;
    for c in &right.columns {
        if c.name != key && left.columns.iter().any(|l| l.name == c.name) {
            return Err(Error::DuplicateColumn(c.name.clone()));
        }
    }
    let right_cols: Vec<usize> = (0..right.columns.len()).filter(|&j| j != rk).collect();

    let mut columns = left.columns.clone();
    columns.extend(right_cols.iter().map(|&j| right.columns[j].clone()));

    let right_keys: Vec<Option<String>> = (0..right.n_rows())
        .map(|i| cell_key(right, rk, i))
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for li in 0..left.n_rows() {
        let Some(k) = cell_key(left, lk, li) else {
            continue;
        };
        for (ri, rkey) in right_keys.iter().enumerate() {
            if rkey.as_deref() != Some(k.as_str()) {
                continue;
            }
            let mut row = left.data.row(li).to_vec();
            row.extend(right_cols.iter().map(|&j| right.data.get(ri, j)));
            rows.push(row);
        }
    }
    let data = if rows.is_empty() {
        Matrix::zeros(0, columns.len())
    } else {
        Matrix::from_rows(rows)?
    };
    Dataset::new(columns, data, left.target)
}

/// Remove columns by name. Dropping the target clears it.
pub fn drop_columns(ds: &Dataset, names: &[String]) -> Result<Dataset> {
    let drop_idx: Vec<usize> = names
        .iter()
        .map(|n| ds.column_index(n))
        .collect::<Result<_>>()?;
    let keep: Vec<usize> = (0..ds.columns.len())
        .filter(|j| !drop_idx.contains(j))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyDataset("all columns dropped".into()));
    }
    let target = ds
        .target
        .and_then(|t| keep.iter().position(|&j| j == t));
    Dataset::new(
        keep.iter().map(|&j| ds.columns[j].clone()).collect(),
        ds.data.select_cols(&keep),
        target,
    )
}

/// Keep only the named columns, in the order given. The target survives only
/// if listed.
pub fn select_columns(ds: &Dataset, names: &[String]) -> Result<Dataset> {
    if names.is_empty() {
        return Err(Error::EmptyDataset("no columns selected".into()));
    }
    let keep: Vec<usize> = names
        .iter()
        .map(|n| ds.column_index(n))
        .collect::<Result<_>>()?;
    let target = ds
        .target
        .and_then(|t| keep.iter().position(|&j| j == t));
    Dataset::new(
        keep.iter().map(|&j| ds.columns[j].clone()).collect(),
        ds.data.select_cols(&keep),
        target,
    )
}

pub fn rename_column(ds: &mut Dataset, old: &str, new: &str) -> Result<()> {
    if ds.columns.iter().any(|c| c.name == new) {
        return Err(Error::DuplicateColumn(new.to_string()));
    }
    let j = ds.column_index(old)?;
    ds.columns[j].name = new.to_string();
    Ok(())
}

/// Append a numeric column.
pub fn add_column(ds: &mut Dataset, name: &str, values: &[f64]) -> Result<()> {
    if ds.columns.iter().any(|c| c.name == name) {
        return Err(Error::DuplicateColumn(name.to_string()));
    }
    if values.len() != ds.n_rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} values for {} rows",
            values.len(),
            ds.n_rows()
        )));
    }
    let col = Matrix::from_rows(values.iter().map(|&v| vec![v]).collect())?;
    ds.data = ds.data.hstack(&col)?;
    ds.columns.push(ColumnMeta::numeric(name));
    Ok(())
}
