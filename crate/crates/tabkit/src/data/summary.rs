//! Dataset description and the numeric correlation matrix.

use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, Dataset};
use crate::error::Result;
use crate::numkit::{stats, Matrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub kind: String,
    pub missing: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// (label, count) in first-appearance order; categorical columns only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<(String, usize)>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub cols: usize,
    pub target: Option<String>,
    pub columns: Vec<ColumnSummary>,
}

pub fn summarize(ds: &Dataset) -> DatasetSummary {
    let columns = ds
        .columns
        .iter()
        .enumerate()
        .map(|(j, meta)| {
            let col = ds.data.col(j);
            let observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            let missing = col.len() - observed.len();
            match &meta.kind {
                ColumnKind::Numeric { .. } => ColumnSummary {
                    name: meta.name.clone(),
                    kind: "numeric".into(),
                    missing,
                    mean: (!observed.is_empty()).then(|| stats::mean(&observed)),
                    std: (!observed.is_empty()).then(|| stats::population_std(&observed)),
                    min: (!observed.is_empty()).then(|| stats::min(&observed)),
                    max: (!observed.is_empty()).then(|| stats::max(&observed)),
                    categories: None,
                },
                ColumnKind::Categorical { categories } => {
                    let mut counts = vec![0usize; categories.len()];
                    for v in &observed {
                        let c = *v as usize;
                        if c < counts.len() {
                            counts[c] += 1;
                        }
                    }
                    ColumnSummary {
                        name: meta.name.clone(),
                        kind: "categorical".into(),
                        missing,
                        mean: None,
                        std: None,
                        min: None,
                        max: None,
                        categories: Some(
                            categories.iter().cloned().zip(counts).collect(),
                        ),
                    }
                }
            }
        })
        .collect();
    DatasetSummary {
        rows: ds.n_rows(),
        cols: ds.n_cols(),
        target: ds.target_name().map(str::to_string),
        columns,
    }
}

/// Pearson correlations among all numeric columns (target included when
/// numeric). Diagonal is exactly 1; a constant column correlates 0 with
/// everything else. Returns the column names alongside the matrix.
pub fn correlation_matrix(ds: &Dataset) -> Result<(Vec<String>, Matrix)> {
    let idx: Vec<usize> = (0..ds.columns.len())
        .filter(|&j| !ds.columns[j].kind.is_categorical())
        .collect();
    let names: Vec<String> = idx.iter().map(|&j| ds.columns[j].name.clone()).collect();
    let cols: Vec<Vec<f64>> = idx.iter().map(|&j| ds.data.col(j)).collect();
    let k = idx.len();
    let mut m = Matrix::zeros(k, k);
    for a in 0..k {
        m.set(a, a, 1.0);
        for b in a + 1..k {
            let r = stats::pearson(&cols[a], &cols[b]);
            m.set(a, b, r);
            m.set(b, a, r);
        }
    }
    Ok((names, m))
}
