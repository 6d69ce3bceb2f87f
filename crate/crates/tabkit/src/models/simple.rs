//! K-nearest-neighbors, Gaussian naive Bayes, and the ZeroR baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_predict_input, check_xy};
use crate::numkit::stats;
use crate::numkit::Matrix;

// ---------------- KNN ----------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Stores its training data; neighbors are ranked by Euclidean distance
/// with index order breaking distance ties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub n_classes: usize,
    pub params: KnnParams,
}

pub fn fit_knn(params: &KnnParams, x: &Matrix, y: &[usize]) -> Result<KnnModel> {
    let k = check_xy(x, y, false)?;
    if params.k == 0 || params.k > x.n_rows() {
        return Err(Error::BadNeighborCount {
            k: params.k,
            n: x.n_rows(),
        });
    }
    Ok(KnnModel {
        x: x.clone(),
        y: y.to_vec(),
        n_classes: k,
        params: params.clone(),
    })
}

impl KnnModel {
    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features())?;
        let mut p = Matrix::zeros(x.n_rows(), self.n_classes);
        let kk = self.params.k;
        for i in 0..x.n_rows() {
            let mut dists: Vec<(f64, usize)> = (0..self.x.n_rows())
                .map(|t| (stats::euclidean(x.row(i), self.x.row(t)), t))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, t) in &dists[..kk] {
                p.set(i, self.y[t], p.get(i, self.y[t]) + 1.0 / kk as f64);
            }
        }
        Ok(p)
    }
}

// ---------------- Gaussian naive Bayes ----------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnbParams {
    /// Fraction of the largest feature variance added to every variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams {
            var_smoothing: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub priors: Vec<f64>,
    /// k x d per-class feature means.
    pub means: Matrix,
    /// k x d smoothed per-class feature variances.
    pub vars: Matrix,
    pub n_classes: usize,
    pub params: GnbParams,
}

pub fn fit_gnb(params: &GnbParams, x: &Matrix, y: &[usize]) -> Result<GnbModel> {
    let k = check_xy(x, y, false)?;
    let d = x.n_cols();
    let n = x.n_rows() as f64;

    let max_var = (0..d)
        .map(|j| stats::population_var(&x.col(j)))
        .fold(0.0f64, f64::max);
    let eps = if max_var > 0.0 {
        params.var_smoothing * max_var
    } else {
        params.var_smoothing
    };

    let mut priors = vec![0.0; k];
    let mut means = Matrix::zeros(k, d);
    let mut vars = Matrix::zeros(k, d);
    for c in 0..k {
        let members: Vec<usize> = y
            .iter()
            .enumerate()
            .filter(|(_, &yc)| yc == c)
            .map(|(i, _)| i)
            .collect();
        priors[c] = members.len() as f64 / n;
        if members.is_empty() {
            continue;
        }
        for j in 0..d {
            let vals: Vec<f64> = members.iter().map(|&i| x.get(i, j)).collect();
            means.set(c, j, stats::mean(&vals));
            vars.set(c, j, stats::population_var(&vals) + eps);
        }
    }
    Ok(GnbModel {
        priors,
        means,
        vars,
        n_classes: k,
        params: params.clone(),
    })
}

impl GnbModel {
    pub fn n_features(&self) -> usize {
        self.means.n_cols()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features())?;
        let d = self.n_features();
        let mut p = Matrix::zeros(x.n_rows(), self.n_classes);
        for i in 0..x.n_rows() {
            let mut logp = vec![f64::NEG_INFINITY; self.n_classes];
            for c in 0..self.n_classes {
                if self.priors[c] == 0.0 {
                    continue;
                }
                let mut lp = self.priors[c].ln();
                for j in 0..d {
                    let var = self.vars.get(c, j);
                    let diff = x.get(i, j) - self.means.get(c, j);
                    lp += -0.5 * ((std::f64::consts::TAU * var).ln() + diff * diff / var);
                }
                logp[c] = lp;
            }
            // normalize via log-sum-exp
            let m = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logp.iter().map(|&l| (l - m).exp()).sum();
            for c in 0..self.n_classes {
                p.set(i, c, ((logp[c] - m).exp()) / sum);
            }
        }
        Ok(p)
    }
}

// ---------------- ZeroR ----------------

/// Predicts the majority training class regardless of input; probabilities
/// are the training class frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZerorModel {
    pub class_freqs: Vec<f64>,
    pub majority: usize,
    pub n_classes: usize,
    pub n_features: usize,
}

pub fn fit_zeror(x: &Matrix, y: &[usize]) -> Result<ZerorModel> {
    let k = check_xy(x, y, true)?;
    let mut freqs = vec![0.0; k];
    for &c in y {
        freqs[c] += 1.0;
    }
    for f in &mut freqs {
        *f /= y.len() as f64;
    }
    Ok(ZerorModel {
        majority: stats::argmax_tie_low(&freqs),
        class_freqs: freqs,
        n_classes: k,
        n_features: x.n_cols(),
    })
}

impl ZerorModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features)?;
        Ok(Matrix::from_fn(x.n_rows(), self.n_classes, |_, c| {
            self.class_freqs[c]
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::stats::argmax_tie_low;

    #[test]
    fn knn_exact_neighbors() {
        // 1-d points; query 2.2 with k=3 has neighbors 2 (y1), 3 (y0), 1 (y1)
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0], vec![10.0]]).unwrap();
        let y = vec![1, 1, 0, 0];
        let model = fit_knn(&KnnParams { k: 3 }, &x, &y).unwrap();
        let q = Matrix::from_rows(vec![vec![2.2]]).unwrap();
        let p = model.predict_proba(&q).unwrap();
        assert!((p.get(0, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.get(0, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn knn_distance_tie_prefers_lower_index() {
        // query 1.5 is equidistant from rows 0 and 1; with k=1 row 0 wins
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let y = vec![1, 0];
        let model = fit_knn(&KnnParams { k: 1 }, &x, &y).unwrap();
        let q = Matrix::from_rows(vec![vec![1.5]]).unwrap();
        let p = model.predict_proba(&q).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
    }

    #[test]
    fn knn_bad_k_rejected() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let y = vec![0, 1];
        assert!(matches!(
            fit_knn(&KnnParams { k: 3 }, &x, &y),
            Err(Error::BadNeighborCount { k: 3, n: 2 })
        ));
        assert!(fit_knn(&KnnParams { k: 0 }, &x, &y).is_err());
    }

    #[test]
    fn gnb_learns_shifted_gaussians() {
        let mut rng = crate::numkit::RngStream::seeded(1);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..200 {
            let c = usize::from(rng.next_f64() < 0.5);
            let mu = if c == 1 { 2.0 } else { -2.0 };
            rows.push(vec![mu + rng.normal(), rng.normal()]);
            y.push(c);
        }
        let x = Matrix::from_rows(rows).unwrap();
        let model = fit_gnb(&GnbParams::default(), &x, &y).unwrap();
        let p = model.predict_proba(&x).unwrap();
        let pred: Vec<usize> = (0..x.n_rows()).map(|i| argmax_tie_low(p.row(i))).collect();
        let acc = crate::metrics::accuracy(&y, &pred).unwrap();
        assert!(acc > 0.9, "accuracy {acc}");
        // class-0 mean of feature 0 near -2
        assert!((model.means.get(0, 0) + 2.0).abs() < 0.3);
    }

    #[test]
    fn gnb_posterior_oracle_equal_variance() {
        // Equal-variance 1-d Gaussians at ±1, equal priors: posterior for
        // class 1 at x is sigmoid(2x/var). Exact since smoothing ~ 0 here.
        let x = Matrix::from_rows(vec![vec![-1.5], vec![-1.0], vec![-0.5], vec![1.5], vec![1.0], vec![0.5]]).unwrap();
        let y = vec![0, 0, 0, 1, 1, 1];
        let model = fit_gnb(&GnbParams { var_smoothing: 0.0 }, &x, &y).unwrap();
        // both classes: mean ±1, population var = ((0.5)^2 + 0 + (0.5)^2)/3 = 1/6
        let var: f64 = 1.0 / 6.0;
        let q = Matrix::from_rows(vec![vec![0.3]]).unwrap();
        let p = model.predict_proba(&q).unwrap();
        let want = 1.0 / (1.0 + (-2.0 * 0.3 / var).exp());
        assert!((p.get(0, 1) - want).abs() < 1e-9, "{} vs {want}", p.get(0, 1));
    }

    #[test]
    fn gnb_handles_constant_feature() {
        let x = Matrix::from_rows(vec![vec![1.0, 0.5], vec![1.0, -0.5], vec![1.0, 0.7], vec![1.0, -0.7]]).unwrap();
        let y = vec![1, 0, 1, 0];
        let model = fit_gnb(&GnbParams::default(), &x, &y).unwrap();
        let p = model.predict_proba(&x).unwrap();
        assert!(p.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zeror_majority_and_freqs() {
        let x = Matrix::zeros(5, 2);
        let y = vec![1, 1, 0, 1, 2];
        let model = fit_zeror(&x, &y).unwrap();
        assert_eq!(model.majority, 1);
        let p = model.predict_proba(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(p.row(0), &[0.2, 0.6, 0.2]);
        assert_eq!(p.row(1), &[0.2, 0.6, 0.2]);
    }

    #[test]
    fn zeror_majority_tie_low() {
        let x = Matrix::zeros(4, 1);
        let model = fit_zeror(&x, &[1, 0, 0, 1]).unwrap();
        assert_eq!(model.majority, 0);
    }

    #[test]
    fn zeror_allows_single_class() {
        let x = Matrix::zeros(3, 1);
        let model = fit_zeror(&x, &[0, 0, 0]).unwrap();
        assert_eq!(model.majority, 0);
        assert_eq!(model.n_classes, 1);
    }
}
