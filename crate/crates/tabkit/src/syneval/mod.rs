//! Fidelity checks for synthetic data against the real dataset it imitates:
//! per-feature two-sample Kolmogorov–Smirnov tests, standard-deviation
//! comparison, and forest feature-importance similarity.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{fit, ForestParams, ModelParams};
use crate::numkit::stats;

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Spearman floor for calling the importance profiles similar.
pub const SPEARMAN_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Exact two-sample KS statistic: the largest gap between the two empirical
/// CDFs, measured after each distinct merged value. Returns (D, p) with the
/// asymptotic p-value (small-sample corrected; quoted accuracy needs ≥ 8
/// points per side).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset("KS needs both samples non-empty".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("KS sample contains a non-finite value".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    // track |i/n - j/m| as the integer |i*m - j*n| so D is an exact rational
    let mut numerator: u64 = 0;
    while i < n || j < m {
        let v = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < n && sa[i] == v {
            i += 1;
        }
        while j < m && sb[j] == v {
            j += 1;
        }
        numerator = numerator.max((i as u64 * m as u64).abs_diff(j as u64 * n as u64));
    }
    let d = numerator as f64 / (n as f64 * m as f64);
    Ok((d, ks_asymptotic_p(d, n, m)))
}

/// Asymptotic Kolmogorov p-value for statistic `d` at sample sizes (n, m),
/// via lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * d with ne = nm/(n+m) and
/// the series 2*sum_k (-1)^(k-1) exp(-2 k^2 lambda^2). Terms below 1e-12
/// stop the sum; if 100 terms do not get there the tail is ~1 and the
/// p-value saturates to 1.
pub fn ks_asymptotic_p(d: f64, n: usize, m: usize) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    let mut p = 0.0;
    let mut converged = false;
    for k in 1..=100u32 {
        let term = 2.0 * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        if term < 1e-12 {
            converged = true;
            break;
        }
        p += if k % 2 == 1 { term } else { -term };
    }
    if !converged {
        return 1.0;
    }
    p.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StdComparison {
    pub name: String,
    pub real_std: f64,
    pub synth_std: f64,
    pub std_abs_diff: f64,
}

fn check_matching_columns(real: &Dataset, synth: &Dataset) -> Result<()> {
    if real.column_names() != synth.column_names()
        || real.target_name() != synth.target_name()
    {
        return Err(Error::ColumnMismatch(format!(
            "real columns {:?} vs synthetic columns {:?}",
            real.column_names(),
            synth.column_names()
        )));
    }
    Ok(())
}

fn numeric_column_indices(ds: &Dataset) -> Vec<usize> {
    (0..ds.n_cols())
        .filter(|&j| !ds.columns[j].kind.is_categorical())
        .collect()
}

/// Population standard deviation of each numeric column, on both sides.
/// Categorical columns are skipped (their codes are not comparable across
/// independently encoded datasets).
pub fn std_compare(real: &Dataset, synth: &Dataset) -> Result<Vec<StdComparison>> {
    check_matching_columns(real, synth)?;
    let mut out = Vec::new();
    for j in numeric_column_indices(real) {
        let real_std = stats::population_std(&real.data.col(j));
        let synth_std = stats::population_std(&synth.data.col(j));
        out.push(StdComparison {
            name: real.columns[j].name.clone(),
            real_std,
            synth_std,
            std_abs_diff: (real_std - synth_std).abs(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSimilarity {
    pub real: Vec<f64>,
    pub synth: Vec<f64>,
    pub cosine: f64,
    pub spearman: f64,
}

/// Fit the same forest configuration on both datasets and compare the
/// normalized impurity importances of their features.
pub fn importance_similarity(
    real: &Dataset,
    synth: &Dataset,
    rf_config: &ForestParams,
    seed: u64,
) -> Result<ImportanceSimilarity> {
    check_matching_columns(real, synth)?;
    let importances = |ds: &Dataset| -> Result<Vec<f64>> {
        let (x, y) = ds.to_xy()?;
        let model = fit(&ModelParams::Rforest(rf_config.clone()), &x, &y, seed)?;
        Ok(model
            .feature_importances()
            .expect("forests always expose importances")
            .to_vec())
    };
    let real_imp = importances(real)?;
    let synth_imp = importances(synth)?;
    Ok(ImportanceSimilarity {
        cosine: stats::cosine(&real_imp, &synth_imp),
        spearman: stats::spearman(&real_imp, &synth_imp),
        real: real_imp,
        synth: synth_imp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureFidelity {
    pub name: String,
    pub ks_d: f64,
    pub ks_p: f64,
    pub real_std: f64,
    pub synth_std: f64,
    pub std_abs_diff: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub format_version: u32,
    pub alpha: f64,
    pub spearman_threshold: f64,
    pub per_feature: Vec<FeatureFidelity>,
    pub importance_real: Vec<f64>,
    pub importance_synth: Vec<f64>,
    pub importance_cosine: f64,
    pub importance_spearman: f64,
    pub overall_verdict: Verdict,
    pub notes: Vec<String>,
}

impl FidelityReport {
    /// Per-feature table, one row per numeric column.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("feature,ks_d,ks_p,real_std,synth_std,std_abs_diff,verdict\n");
        for f in &self.per_feature {
            let verdict = match f.verdict {
                Verdict::Consistent => "consistent",
                Verdict::Rejected => "rejected",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.name, f.ks_d, f.ks_p, f.real_std, f.synth_std, f.std_abs_diff, verdict
            ));
        }
        out
    }

    /// Bar-chart source: real vs synthetic importance per feature.
    pub fn importance_csv(&self, feature_names: &[String]) -> String {
        let mut out = String::from("feature,real_importance,synth_importance\n");
        for (i, name) in feature_names.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                name, self.importance_real[i], self.importance_synth[i]
            ));
        }
        out
    }
}

/// Full fidelity analysis. A numeric column is rejected when its KS p-value
/// falls below `alpha`; the whole report is consistent only if no column is
/// rejected and the importance profiles correlate (Spearman ≥ 0.5).
pub fn fidelity_report(
    real: &Dataset,
    synth: &Dataset,
    alpha: f64,
    rf_config: &ForestParams,
    seed: u64,
) -> Result<FidelityReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Usage(format!("alpha must be in (0,1), got {alpha}")));
    }
    check_matching_columns(real, synth)?;
    let stds = std_compare(real, synth)?;
    let mut per_feature = Vec::new();
    let mut notes = Vec::new();
    for (row, j) in stds.iter().zip(numeric_column_indices(real)) {
        let (ks_d, ks_p) = ks_two_sample(&real.data.col(j), &synth.data.col(j))?;
        let verdict = if ks_p < alpha {
            Verdict::Rejected
        } else {
            Verdict::Consistent
        };
        per_feature.push(FeatureFidelity {
            name: row.name.clone(),
            ks_d,
            ks_p,
            real_std: row.real_std,
            synth_std: row.synth_std,
            std_abs_diff: row.std_abs_diff,
            verdict,
        });
    }
    for name in real.categorical_columns() {
        notes.push(format!(
            "column '{name}' is categorical; KS and std comparison skipped"
        ));
    }
    let similarity = importance_similarity(real, synth, rf_config, seed)?;
    let all_consistent = per_feature
        .iter()
        .all(|f| f.verdict == Verdict::Consistent);
    let overall = if all_consistent && similarity.spearman >= SPEARMAN_THRESHOLD {
        Verdict::Consistent
    } else {
        Verdict::Rejected
    };
    Ok(FidelityReport {
        format_version: REPORT_FORMAT_VERSION,
        alpha,
        spearman_threshold: SPEARMAN_THRESHOLD,
        per_feature,
        importance_real: similarity.real,
        importance_synth: similarity.synth,
        importance_cosine: similarity.cosine,
        importance_spearman: similarity.spearman,
        overall_verdict: overall,
        notes,
    })
}
