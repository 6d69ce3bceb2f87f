//! Competing per-instance explainers: a local linear surrogate fit on
//! Gaussian perturbations, greedy feature knock-out, and the gradient of a
//! Parzen-window approximation of the model's own labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ClassifierModel;
use crate::numkit::{solve, Matrix, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalLinearConfig {
    pub n_samples: usize,
    /// Kernel width for the proximity weights; None picks 0.75 * sqrt(d).
    pub kernel_width: Option<f64>,
    /// Ridge penalty on the slope coefficients (the intercept is free).
    pub ridge: f64,
    pub seed: u64,
}

impl Default for LocalLinearConfig {
    fn default() -> Self {
        LocalLinearConfig {
            n_samples: 1000,
            kernel_width: None,
            ridge: 1e-3,
            seed: 0,
        }
    }
}

/// Fit a weighted ridge line to the model's predicted-class probability on
/// Gaussian perturbations of the instance. `feature_stds` sets the per-axis
/// perturbation scale (zero keeps that feature pinned and its slope at 0);
/// the returned slopes are the per-feature scores.
pub fn local_linear_explain(
    model: &ClassifierModel,
    instance: &[f64],
    feature_stds: &[f64],
    cfg: &LocalLinearConfig,
) -> Result<Vec<f64>> {
    let d = instance.len();
    if feature_stds.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "{} perturbation scales for {d} features",
            feature_stds.len()
        )));
    }
    if cfg.n_samples == 0 {
        return Err(Error::Usage("n_samples must be at least 1".into()));
    }
    if cfg.ridge <= 0.0 {
        return Err(Error::Usage("ridge penalty must be positive".into()));
    }
    if feature_stds.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::Usage(
            "perturbation scales must be finite and non-negative".into(),
        ));
    }
    if feature_stds.iter().all(|s| *s == 0.0) {
        return Err(Error::DegeneratePerturbations);
    }
    let kernel_width = match cfg.kernel_width {
        Some(w) if w > 0.0 => w,
        Some(w) => return Err(Error::BadBandwidth(w)),
        None => 0.75 * (d as f64).sqrt(),
    };

    let target_class = model.predict(&Matrix::from_rows(vec![instance.to_vec()])?)?[0];
    let mut rng = RngStream::seeded(cfg.seed);

    // offsets from the instance double as the (uncentered) design matrix
    let mut eps = Matrix::zeros(cfg.n_samples, d);
    let mut weights = Vec::with_capacity(cfg.n_samples);
    let mut perturbed = Matrix::zeros(cfg.n_samples, d);
    for i in 0..cfg.n_samples {
        let mut dist2 = 0.0;
        for j in 0..d {
            let e = rng.normal() * feature_stds[j];
            eps.set(i, j, e);
            perturbed.set(i, j, instance[j] + e);
            if feature_stds[j] > 0.0 {
                dist2 += (e / feature_stds[j]).powi(2);
            }
        }
        weights.push((-dist2 / (kernel_width * kernel_width)).exp());
    }
    let proba = model.predict_proba(&perturbed)?;

    // weighted ridge with an unpenalized intercept in column d
    let p = d + 1;
    let mut ata = vec![vec![0.0; p]; p];
    let mut atb = vec![0.0; p];
    for i in 0..cfg.n_samples {
        let w = weights[i];
        let target = proba.get(i, target_class);
        let row: Vec<f64> = (0..d).map(|j| eps.get(i, j)).chain([1.0]).collect();
        for a in 0..p {
            for b in 0..p {
                ata[a][b] += w * row[a] * row[b];
            }
            atb[a] += w * row[a] * target;
        }
    }
    for (j, row) in ata.iter_mut().enumerate().take(d) {
        row[j] += cfg.ridge;
    }
    let beta = solve::solve(&Matrix::from_rows(ata)?, &atb)?;
    Ok(beta[..d].to_vec())
}

/// Greedy knock-out: repeatedly zero the live feature whose zeroing most
/// reduces the predicted-class probability, stopping after k picks. Returns
/// (feature, probability drop) in pick order; ties go to the lower index.
pub fn greedy_explain(
    model: &ClassifierModel,
    instance: &[f64],
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    let d = instance.len();
    if d == 0 {
        return Err(Error::Usage("instance has no features".into()));
    }
    if k > d {
        return Err(Error::Usage(format!("cannot pick {k} of {d} features")));
    }
    let target_class = model.predict(&Matrix::from_rows(vec![instance.to_vec()])?)?[0];
    let mut z = instance.to_vec();
    let mut current = model
        .predict_proba(&Matrix::from_rows(vec![z.clone()])?)?
        .get(0, target_class);
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let mut candidates = Vec::with_capacity(remaining.len());
        for &j in &remaining {
            let mut row = z.clone();
            row[j] = 0.0;
            candidates.push(row);
        }
        let proba = model.predict_proba(&Matrix::from_rows(candidates)?)?;
        let mut best = 0;
        for i in 1..remaining.len() {
            if proba.get(i, target_class) < proba.get(best, target_class) {
                best = i;
            }
        }
        let j = remaining.remove(best);
        let after = proba.get(best, target_class);
        picks.push((j, current - after));
        z[j] = 0.0;
        current = after;
    }
    Ok(picks)
}

/// Expand greedy picks into a full score vector (unpicked features score 0).
pub fn greedy_scores(picks: &[(usize, f64)], d: usize) -> Vec<f64> {
    let mut scores = vec![0.0; d];
    for &(j, s) in picks {
        scores[j] = s;
    }
    scores
}

/// Gradient of a Parzen-window posterior at the instance, for one fixed
/// class. The window classifier approximates the model's hard labels on the
/// training rows.
pub fn parzen_class_gradient(
    model: &ClassifierModel,
    train_x: &Matrix,
    instance: &[f64],
    class: usize,
    bandwidth: f64,
) -> Result<Vec<f64>> {
    let n = train_x.n_rows();
    let d = train_x.n_cols();
    if n == 0 {
        return Err(Error::EmptyDataset("no training rows".into()));
    }
    if instance.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "instance has {} features, training data has {d}",
            instance.len()
        )));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::BadBandwidth(bandwidth));
    }
    let k = model.n_classes();
    if class >= k {
        return Err(Error::Usage(format!("class {class} out of {k}")));
    }
    let labels = model.predict(train_x)?;
    let predicted = class;
    let h2 = bandwidth * bandwidth;

    // shift exponents by their max: the posterior and its gradient are
    // ratios, so the common factor cancels and nothing underflows to 0/0
    let exponents: Vec<f64> = (0..n)
        .map(|i| {
            let mut dist2 = 0.0;
            for j in 0..d {
                dist2 += (instance[j] - train_x.get(i, j)).powi(2);
            }
            -dist2 / (2.0 * h2)
        })
        .collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kernels: Vec<f64> = exponents.iter().map(|e| (e - shift).exp()).collect();

    let mut class_mass = vec![0.0; k];
    let mut class_grad = vec![vec![0.0; d]; k];
    for i in 0..n {
        class_mass[labels[i]] += kernels[i];
        for j in 0..d {
            class_grad[labels[i]][j] += kernels[i] * (train_x.get(i, j) - instance[j]) / h2;
        }
    }
    let total: f64 = class_mass.iter().sum();
    let total_grad: Vec<f64> = (0..d)
        .map(|j| class_grad.iter().map(|g| g[j]).sum())
        .collect();

    // quotient rule on P(c|x) = mass_c / total
    let grad: Vec<f64> = (0..d)
        .map(|j| {
            (class_grad[predicted][j] * total - class_mass[predicted] * total_grad[j])
                / (total * total)
        })
        .collect();
    Ok(grad)
}

/// Parzen explanation of a prediction: the fixed-class gradient taken at
/// the model's predicted class for the instance. Returns (class, gradient).
pub fn parzen_explain(
    model: &ClassifierModel,
    train_x: &Matrix,
    instance: &[f64],
    bandwidth: f64,
) -> Result<(usize, Vec<f64>)> {
    if train_x.n_rows() == 0 {
        return Err(Error::EmptyDataset("no training rows".into()));
    }
    if instance.len() != train_x.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "instance has {} features, training data has {}",
            instance.len(),
            train_x.n_cols()
        )));
    }
    let predicted = model.predict(&Matrix::from_rows(vec![instance.to_vec()])?)?[0];
    let grad = parzen_class_gradient(model, train_x, instance, predicted, bandwidth)?;
    Ok((predicted, grad))
}
