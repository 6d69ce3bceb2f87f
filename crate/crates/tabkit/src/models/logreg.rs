//! Multinomial logistic regression: softmax over linear scores, trained by
//! full-batch gradient descent with L2 on the weights (bias unpenalized).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{check_predict_input, check_xy};
use crate::numkit::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogregParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            learning_rate: 0.1,
            epochs: 200,
            l2: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogregModel {
    /// k x d class weight rows.
    pub weights: Matrix,
    /// k per-class intercepts.
    pub bias: Vec<f64>,
    pub n_classes: usize,
    pub params: LogregParams,
}

/// Row-wise softmax with max subtraction for stability.
pub(crate) fn softmax_rows(scores: &Matrix) -> Matrix {
    let mut out = scores.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn scores(weights: &Matrix, bias: &[f64], x: &Matrix) -> Result<Matrix> {
    let mut s = x.matmul(&weights.transpose())?;
    for i in 0..s.n_rows() {
        for (j, b) in bias.iter().enumerate() {
            s.set(i, j, s.get(i, j) + b);
        }
    }
    Ok(s)
}

/// Mean cross-entropy plus (l2/2)·‖W‖²; the quantity gradient descent
/// minimizes. Exposed so gradients can be checked numerically.
pub fn loss(weights: &Matrix, bias: &[f64], x: &Matrix, y: &[usize], l2: f64) -> Result<f64> {
    let p = softmax_rows(&scores(weights, bias, x)?);
    let n = x.n_rows() as f64;
    let mut nll = 0.0;
    for (i, &c) in y.iter().enumerate() {
        nll -= p.get(i, c).max(1e-300).ln();
    }
    let penalty = weights.data().iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    Ok(nll / n + penalty)
}

/// Analytic gradient of [`loss`] with respect to (weights, bias).
pub fn loss_grad(
    weights: &Matrix,
    bias: &[f64],
    x: &Matrix,
    y: &[usize],
    l2: f64,
) -> Result<(Matrix, Vec<f64>)> {
    let k = weights.n_rows();
    let n = x.n_rows() as f64;
    let mut resid = softmax_rows(&scores(weights, bias, x)?); // P - Y
    for (i, &c) in y.iter().enumerate() {
        resid.set(i, c, resid.get(i, c) - 1.0);
    }
    let mut gw = resid.transpose().matmul(x)?; // k x d
    for (g, w) in gw.data_mut().iter_mut().zip(weights.data()) {
        *g = *g / n + l2 * w;
    }
    let gb: Vec<f64> = (0..k).map(|c| resid.col(c).iter().sum::<f64>() / n).collect();
    Ok((gw, gb))
}

pub fn fit(params: &LogregParams, x: &Matrix, y: &[usize]) -> Result<LogregModel> {
    let k = check_xy(x, y, false)?;
    let d = x.n_cols();
    let mut weights = Matrix::zeros(k, d);
    let mut bias = vec![0.0; k];
    for _ in 0..params.epochs {
        let (gw, gb) = loss_grad(&weights, &bias, x, y, params.l2)?;
        for (w, g) in weights.data_mut().iter_mut().zip(gw.data()) {
            *w -= params.learning_rate * g;
        }
        for (b, g) in bias.iter_mut().zip(&gb) {
            *b -= params.learning_rate * g;
        }
    }
    Ok(LogregModel {
        weights,
        bias,
        n_classes: k,
        params: params.clone(),
    })
}

impl LogregModel {
    pub fn n_features(&self) -> usize {
        self.weights.n_cols()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features())?;
        Ok(softmax_rows(&scores(&self.weights, &self.bias, x)?))
    }
}
