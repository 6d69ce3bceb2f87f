//! Tabular datasets: typed columns over a dense f64 matrix.
//!
//! Categorical cells are stored as their category code (first-appearance
//! order, 0-based); missing cells are NaN until imputed.

pub mod combine;
pub mod io;
pub mod split;
pub mod summary;
pub mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Matrix;

pub use combine::{drop_columns, join_on, merge_positional, rename_column, select_columns};
pub use io::{from_string_table, load_csv, save_csv};
pub use split::{kfold_splits, train_test_split, SplitSpec};
pub use summary::{correlation_matrix, summarize, ColumnSummary, DatasetSummary};
pub use transform::{apply_scaler, impute_missing, invert_scaler, standardize, ImputePolicy, Scaler};

pub const MISSING_MARKERS: [&str; 3] = ["", "na", "nan"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    /// Parsed as f64; `integer` records whether every observed value was integral.
    Numeric { integer: bool },
    /// Encoded as category codes; labels listed in first-appearance order.
    Categorical { categories: Vec<String> },
}

impl ColumnKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl ColumnMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Numeric { integer: false },
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Categorical { categories },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<ColumnMeta>,
    pub data: Matrix,
    /// Index into `columns` of the prediction target, if one is set.
    pub target: Option<usize>,
}

impl Dataset {
    pub fn new(columns: Vec<ColumnMeta>, data: Matrix, target: Option<usize>) -> Result<Self> {
        if columns.len() != data.n_cols() {
            return Err(Error::ShapeMismatch(format!(
                "{} column metas for a {}-column matrix",
                columns.len(),
                data.n_cols()
            )));
        }
        if let Some(t) = target {
            if t >= columns.len() {
                return Err(Error::UnknownColumn(format!("target index {t}")));
            }
        }
        Ok(Dataset {
            columns,
            data,
            target,
        })
    }

    /// All-numeric dataset from a feature matrix, names x0..x{d-1} plus a
    /// target column named `y` holding the labels.
    pub fn from_xy(x: &Matrix, y: &[usize], target_name: &str) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows vs {} labels",
                x.n_rows(),
                y.len()
            )));
        }
        let mut columns: Vec<ColumnMeta> = (0..x.n_cols())
            .map(|j| ColumnMeta::numeric(format!("x{j}")))
            .collect();
        columns.push(ColumnMeta {
            name: target_name.to_string(),
            kind: ColumnKind::Numeric { integer: true },
        });
        let ycol = Matrix::from_rows(y.iter().map(|&v| vec![v as f64]).collect())?;
        let data = x.hstack(&ycol)?;
        let t = columns.len() - 1;
        Dataset::new(columns, data, Some(t))
    }

    pub fn n_rows(&self) -> usize {
        self.data.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.n_cols()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn set_target(&mut self, name: &str) -> Result<()> {
        self.target = Some(self.column_index(name)?);
        Ok(())
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target.map(|t| self.columns[t].name.as_str())
    }

    /// Indices of all non-target columns.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&j| Some(j) != self.target)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|j| self.columns[j].name.clone())
            .collect()
    }

    /// Feature matrix: all non-target columns, in dataset order.
    pub fn features(&self) -> Matrix {
        self.data.select_cols(&self.feature_indices())
    }

    /// Target column as class codes. Values must be non-negative integers.
    pub fn labels(&self) -> Result<Vec<usize>> {
        let t = self.target.ok_or(Error::MissingTarget)?;
        let col = self.data.col(t);
        let mut y = Vec::with_capacity(col.len());
        for (i, v) in col.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Data(format!(
                    "target value {v} at row {i} is not a class code"
                )));
            }
            y.push(*v as usize);
        }
        Ok(y)
    }

    pub fn to_xy(&self) -> Result<(Matrix, Vec<usize>)> {
        Ok((self.features(), self.labels()?))
    }

    /// Decoded target labels as strings (category label for categorical
    /// targets, numeric text otherwise).
    pub fn class_names(&self) -> Result<Vec<String>> {
        let t = self.target.ok_or(Error::MissingTarget)?;
        let y = self.labels()?;
        let k = y.iter().copied().max().map_or(0, |m| m + 1);
        match &self.columns[t].kind {
            ColumnKind::Categorical { categories } => Ok((0..k)
                .map(|c| {
                    categories
                        .get(c)
                        .cloned()
                        .unwrap_or_else(|| c.to_string())
                })
                .collect()),
            ColumnKind::Numeric { .. } => Ok((0..k).map(|c| c.to_string()).collect()),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            data: self.data.select_rows(idx),
            target: self.target,
        }
    }

    pub fn has_missing(&self) -> bool {
        self.data.data().iter().any(|v| v.is_nan())
    }

    /// Names of categorical columns, if any.
    pub fn categorical_columns(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind.is_categorical())
            .map(|c| c.name.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let x = Matrix::from_rows(vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]])
            .unwrap();
        Dataset::from_xy(&x, &[0, 1, 0], "y").unwrap()
    }

    #[test]
    fn from_xy_shapes_and_names() {
        let ds = toy();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_cols(), 3);
        assert_eq!(ds.feature_names(), vec!["x0", "x1"]);
        assert_eq!(ds.target_name(), Some("y"));
        assert_eq!(ds.labels().unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn features_exclude_target() {
        let ds = toy();
        let f = ds.features();
        assert_eq!(f.n_cols(), 2);
        assert_eq!(f.row(1), &[2.0, 20.0]);
    }

    #[test]
    fn non_integral_target_rejected() {
        let mut ds = toy();
        let t = ds.target.unwrap();
        ds.data.set(0, t, 0.5);
        assert!(ds.labels().is_err());
    }

    #[test]
    fn missing_target_rejected() {
        let mut ds = toy();
        ds.target = None;
        assert!(ds.labels().is_err());
        assert_eq!(ds.features().n_cols(), 3);
    }

    #[test]
    fn column_meta_serde_shape() {
        let m = ColumnMeta::categorical("color", vec!["red".into(), "blue".into()]);
        let js = serde_json::to_string(&m).unwrap();
        assert_eq!(
            js,
            r#"{"name":"color","kind":"categorical","categories":["red","blue"]}"#
        );
        let n = ColumnMeta::numeric("age");
        assert_eq!(
            serde_json::to_string(&n).unwrap(),
            r#"{"name":"age","kind":"numeric","integer":false}"#
        );
    }
}
