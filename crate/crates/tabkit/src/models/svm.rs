//! Linear SVM, one-vs-rest, trained by full-batch subgradient descent on
//! the hinge loss ½‖w‖² + (C/n)·Σ max(0, 1 − y·(w·x + b)). The bias is
//! unregularized. Probabilities are a softmax over the margins (no Platt
//! calibration).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::logreg::softmax_rows;
use crate::models::{check_predict_input, check_xy};
use crate::numkit::stats::argmax_tie_low;
use crate::numkit::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            learning_rate: 0.01,
            epochs: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// k x d: one weight row per one-vs-rest classifier.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub n_classes: usize,
    pub params: SvmParams,
}

pub fn fit(params: &SvmParams, x: &Matrix, y: &[usize]) -> Result<SvmModel> {
    let k = check_xy(x, y, false)?;
    let n = x.n_rows();
    let d = x.n_cols();
    let nf = n as f64;
    let mut weights = Matrix::zeros(k, d);
    let mut bias = vec![0.0; k];

    for c in 0..k {
        let pm: Vec<f64> = y.iter().map(|&yi| if yi == c { 1.0 } else { -1.0 }).collect();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        for _ in 0..params.epochs {
            let mut gw = w.clone(); // regularizer gradient: w itself
            let mut gb = 0.0;
            for i in 0..n {
                let margin = pm[i] * (crate::numkit::stats::dot(&w, x.row(i)) + b);
                if margin < 1.0 {
                    let scale = params.c / nf * pm[i];
                    for (g, &xv) in gw.iter_mut().zip(x.row(i)) {
                        *g -= scale * xv;
                    }
                    gb -= scale;
                }
            }
            for (wv, g) in w.iter_mut().zip(&gw) {
                *wv -= params.learning_rate * g;
            }
            b -= params.learning_rate * gb;
        }
        weights.row_mut(c).copy_from_slice(&w);
        bias[c] = b;
    }
    Ok(SvmModel {
        weights,
        bias,
        n_classes: k,
        params: params.clone(),
    })
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.weights.n_cols()
    }

    /// Raw one-vs-rest margins, one column per class.
    pub fn decision_function(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features())?;
        let mut m = x.matmul(&self.weights.transpose())?;
        for i in 0..m.n_rows() {
            for (c, b) in self.bias.iter().enumerate() {
                m.set(i, c, m.get(i, c) + b);
            }
        }
        Ok(m)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let m = self.decision_function(x)?;
        Ok((0..m.n_rows()).map(|i| argmax_tie_low(m.row(i))).collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        Ok(softmax_rows(&self.decision_function(x)?))
    }
}
