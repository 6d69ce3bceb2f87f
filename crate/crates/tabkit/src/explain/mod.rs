//! Local interpretation via feature knock-out.
//!
//! Two scores per feature — accuracy lost when the column is zeroed and the
//! model refit (drop), and accuracy lost when the column is shuffled under
//! the already-fitted model (permutation) — plus their elementwise sum.
//! The score vectors depend only on the training run; the explained instance
//! contributes its predicted class.

pub mod bench;
pub mod surrogate;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::models::{fit, ClassifierModel, ModelParams};
use crate::numkit::{Matrix, RngStream};

pub use bench::{
    default_gold_suite, generate_gold, recall_on_gold, topk_recall, xai_benchmark,
    BenchmarkConfig, BenchmarkResult, GoldConfig, GoldDataset, EXPLAINER_IDS,
};
pub use surrogate::{greedy_explain, local_linear_explain, parzen_explain, LocalLinearConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub name: String,
    pub drop: f64,
    pub perm: f64,
    pub combined: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub instance: Vec<f64>,
    pub predicted_class: usize,
    /// Accuracy of the unmodified model on the evaluation rows.
    pub baseline_accuracy: f64,
    pub per_feature: Vec<FeatureScore>,
}

impl Explanation {
    fn assemble(
        instance: Vec<f64>,
        predicted_class: usize,
        baseline_accuracy: f64,
        names: &[String],
        drop: &[f64],
        perm: &[f64],
    ) -> Self {
        let per_feature = names
            .iter()
            .zip(drop.iter().zip(perm))
            .map(|(name, (d, p))| FeatureScore {
                name: name.clone(),
                drop: *d,
                perm: *p,
                combined: d + p,
            })
            .collect();
        Explanation {
            instance,
            predicted_class,
            baseline_accuracy,
            per_feature,
        }
    }

    pub fn drop_scores(&self) -> Vec<f64> {
        self.per_feature.iter().map(|f| f.drop).collect()
    }

    pub fn perm_scores(&self) -> Vec<f64> {
        self.per_feature.iter().map(|f| f.perm).collect()
    }

    pub fn combined_scores(&self) -> Vec<f64> {
        self.per_feature.iter().map(|f| f.combined).collect()
    }

    /// Deterministic CSV companion to the JSON export: one row per feature.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("feature,drop,perm,combined\n");
        for f in &self.per_feature {
            out.push_str(&format!("{},{},{},{}\n", f.name, f.drop, f.perm, f.combined));
        }
        out
    }

    /// Features ranked by |combined| descending, index breaking ties.
    pub fn ranked_features(&self) -> Vec<usize> {
        rank_by_magnitude(&self.combined_scores())
    }
}

/// Indices sorted by |score| descending; equal magnitudes keep index order.
pub fn rank_by_magnitude(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .abs()
            .partial_cmp(&scores[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    idx
}

fn check_same_schema(train: &Dataset, eval_data: &Dataset) -> Result<()> {
    if train.column_names() != eval_data.column_names()
        || train.target_name() != eval_data.target_name()
    {
        return Err(Error::ColumnMismatch(format!(
            "train columns {:?} vs eval columns {:?}",
            train.column_names(),
            eval_data.column_names()
        )));
    }
    Ok(())
}

fn zero_column(x: &Matrix, j: usize) -> Matrix {
    let mut z = x.clone();
    for i in 0..z.n_rows() {
        z.set(i, j, 0.0);
    }
    z
}

/// Drop-column importances: per feature, zero the column in both the
/// training and evaluation copies, refit with the same hyperparameters and
/// seed, and take baseline accuracy minus the refit's accuracy. Returns
/// (baseline, scores).
pub fn drop_column_importances(
    params: &ModelParams,
    train: &Dataset,
    eval_data: &Dataset,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    check_same_schema(train, eval_data)?;
    let (x, y) = train.to_xy()?;
    let (xe, ye) = eval_data.to_xy()?;
    let model = fit(params, &x, &y, seed)?;
    let baseline = accuracy(&ye, &model.predict(&xe)?)?;
    let mut scores = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let refit = fit(params, &zero_column(&x, j), &y, seed)?;
        let acc = accuracy(&ye, &refit.predict(&zero_column(&xe, j))?)?;
        scores.push(baseline - acc);
    }
    Ok((baseline, scores))
}

/// Permutation importances of a fitted model: per feature, shuffle the
/// column `n_repeats` times (stream j·n_repeats + r for feature j, repeat r)
/// and average the accuracy lost. The model is never refit.
pub fn permutation_importances(
    model: &ClassifierModel,
    eval_data: &Dataset,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_repeats == 0 {
        return Err(Error::Usage("n_repeats must be at least 1".into()));
    }
    let (x, y) = eval_data.to_xy()?;
    let baseline = accuracy(&y, &model.predict(&x)?)?;
    let root = RngStream::seeded(seed);
    let mut scores = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let mut lost = 0.0;
        for r in 0..n_repeats {
            let mut rng = root.split((j * n_repeats + r) as u64);
            let mut col = x.col(j);
            rng.shuffle(&mut col);
            let mut xp = x.clone();
            xp.set_col(j, &col);
            lost += baseline - accuracy(&y, &model.predict(&xp)?)?;
        }
        scores.push(lost / n_repeats as f64);
    }
    Ok(scores)
}

/// Full interpretation of one instance: drop-column and permutation scores
/// measured on the training rows, combined by elementwise sum, plus the
/// model's predicted class for the instance.
pub fn medley_interpret(
    params: &ModelParams,
    train: &Dataset,
    instance: &[f64],
    n_repeats: usize,
    seed: u64,
) -> Result<Explanation> {
    let (x, y) = train.to_xy()?;
    if instance.len() != x.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "instance has {} features, training data has {}",
            instance.len(),
            x.n_cols()
        )));
    }
    let model = fit(params, &x, &y, seed)?;
    let predicted_class = model.predict(&Matrix::from_rows(vec![instance.to_vec()])?)?[0];
    let (baseline_accuracy, drop) = drop_column_importances(params, train, train, seed)?;
    let perm = permutation_importances(&model, train, n_repeats, seed)?;
    Ok(Explanation::assemble(
        instance.to_vec(),
        predicted_class,
        baseline_accuracy,
        &train.feature_names(),
        &drop,
        &perm,
    ))
}
