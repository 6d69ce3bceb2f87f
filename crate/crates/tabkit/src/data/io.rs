//! CSV loading/saving and the string-table core both CSV and parsed LLM
//! replies go through.

use std::path::Path;

use crate::data::{ColumnKind, ColumnMeta, Dataset, MISSING_MARKERS};
use crate::error::{Error, Result};
use crate::numkit::Matrix;

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_MARKERS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Build a typed dataset from header names and string rows.
///
/// A column is numeric when every non-missing cell parses as f64; otherwise
/// it is categorical with labels coded in first-appearance order. Missing
/// markers ("", "NA", "NaN", any case) become NaN. `line` in ragged-row
/// errors is 1-based counting the header as line 1.
pub fn from_string_table(
    headers: &[String],
    rows: &[Vec<String>],
    target: Option<&str>,
) -> Result<Dataset> {
    if headers.is_empty() {
        return Err(Error::EmptyDataset("no columns".into()));
    }
    for (j, h) in headers.iter().enumerate() {
        if headers[..j].contains(h) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset("no data rows".into()));
    }
    let d = headers.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::RaggedRow {
                line: i + 2,
                expected: d,
                found: row.len(),
            });
        }
    }

    let n = rows.len();
    let mut data = Matrix::zeros(n, d);
    let mut columns = Vec::with_capacity(d);
    for j in 0..d {
        let numeric = rows
            .iter()
            .all(|r| is_missing(&r[j]) || r[j].trim().parse::<f64>().is_ok());
        if numeric {
            let mut integer = true;
            let mut any = false;
            for (i, r) in rows.iter().enumerate() {
                let v = if is_missing(&r[j]) {
                    f64::NAN
                } else {
                    any = true;
                    r[j].trim().parse::<f64>().unwrap()
                };
                if v.is_finite() && v.fract() != 0.0 {
                    integer = false;
                }
                data.set(i, j, v);
            }
            columns.push(ColumnMeta {
                name: headers[j].clone(),
                kind: ColumnKind::Numeric {
                    integer: integer && any,
                },
            });
        } else {
            let mut categories: Vec<String> = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                if is_missing(&r[j]) {
                    data.set(i, j, f64::NAN);
                    continue;
                }
                let label = r[j].trim();
                let code = match categories.iter().position(|c| c == label) {
                    Some(c) => c,
                    None => {
                        categories.push(label.to_string());
                        categories.len() - 1
                    }
                };
                data.set(i, j, code as f64);
            }
            columns.push(ColumnMeta {
                name: headers[j].clone(),
                kind: ColumnKind::Categorical { categories },
            });
        }
    }

    let target_idx = match target {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?,
        ),
        None => None,
    };
    Dataset::new(columns, data, target_idx)
}

/// Load a CSV file with a header row.
pub fn load_csv(path: impl AsRef<Path>, target: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(io),
            other => Error::Data(format!("{other:?}")),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        rows.push(rec.iter().map(|s| s.to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    from_string_table(&headers, &rows, target)
}

/// Format one cell for CSV output: empty for missing, category label for
/// categorical codes, decimal text otherwise.
fn render_cell(meta: &ColumnMeta, v: f64) -> String {
    if v.is_nan() {
        return String::new();
    }
    match &meta.kind {
        ColumnKind::Categorical { categories } => {
            let code = v as usize;
            categories
                .get(code)
                .cloned()
                .unwrap_or_else(|| v.to_string())
        }
        ColumnKind::Numeric { .. } => v.to_string(),
    }
}

/// Write the dataset as CSV (header + decoded cells). Loading the result
/// with the same target name reproduces the dataset exactly.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    w.write_record(ds.columns.iter().map(|c| c.name.as_str()))
        .map_err(|e| Error::Data(e.to_string()))?;
    for i in 0..ds.n_rows() {
        let row: Vec<String> = ds
            .columns
            .iter()
            .enumerate()
            .map(|(j, meta)| render_cell(meta, ds.data.get(i, j)))
            .collect();
        w.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
