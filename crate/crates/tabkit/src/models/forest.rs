//! Random forest: bootstrap-resampled CART trees with per-split feature
//! subsampling; probabilities are averaged over trees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::tree::{fit_for_forest, TreeModel, TreeParams};
use crate::models::{check_predict_input, check_xy};
use crate::numkit::{Matrix, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; None = ⌈√d⌉.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub n_features: usize,
    pub n_classes: usize,
    /// Mean impurity-decrease importances over trees, normalized to sum 1.
    pub importances: Vec<f64>,
    pub params: ForestParams,
}

/// Tree t draws its bootstrap and split features from the seed's child
/// stream t, so any tree can be reproduced without building the others.
pub fn fit(params: &ForestParams, x: &Matrix, y: &[usize], seed: u64) -> Result<ForestModel> {
    fit_with_stream(params, x, y, &RngStream::seeded(seed))
}

/// As [`fit`], but drawing from an existing stream (ensembles hand the
/// forest a child stream of their own seed).
pub fn fit_with_stream(
    params: &ForestParams,
    x: &Matrix,
    y: &[usize],
    root: &RngStream,
) -> Result<ForestModel> {
    let k = check_xy(x, y, false)?;
    if params.n_trees == 0 {
        return Err(Error::Usage("forest needs at least one tree".into()));
    }
    let d = x.n_cols();
    let n = x.n_rows();
    let max_features = params
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = root.split(t as u64);
        let boot = rng.bootstrap_indices(n);
        trees.push(fit_for_forest(
            &tree_params,
            x,
            y,
            k,
            &boot,
            max_features,
            &mut rng,
        ));
    }
    let mut importances = vec![0.0; d];
    for tree in &trees {
        for (acc, v) in importances.iter_mut().zip(&tree.importances) {
            *acc += v;
        }
    }
    let sum: f64 = importances.iter().sum();
    if sum > 0.0 {
        for v in &mut importances {
            *v /= sum;
        }
    }
    Ok(ForestModel {
        trees,
        n_features: d,
        n_classes: k,
        importances,
        params: params.clone(),
    })
}

impl ForestModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        check_predict_input(x, self.n_features)?;
        let mut acc = Matrix::zeros(x.n_rows(), self.n_classes);
        for tree in &self.trees {
            let p = tree.predict_proba(x)?;
            for (a, v) in acc.data_mut().iter_mut().zip(p.data()) {
                *a += v;
            }
        }
        let nt = self.trees.len() as f64;
        for a in acc.data_mut() {
            *a /= nt;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::stats::argmax_tie_low;

    fn ring_data(seed: u64, n: usize) -> (Matrix, Vec<usize>) {
        // class 1 inside the unit circle, class 0 in an annulus — needs a
        // nonlinear boundary
        let mut rng = RngStream::seeded(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let inside = rng.next_f64() < 0.5;
            let (r_lo, r_hi) = if inside { (0.0, 0.8) } else { (1.2, 2.0) };
            let r = rng.uniform(r_lo, r_hi);
            let th = rng.uniform(0.0, std::f64::consts::TAU);
            rows.push(vec![r * th.cos(), r * th.sin()]);
            y.push(usize::from(inside));
        }
        (Matrix::from_rows(rows).unwrap(), y)
    }

    fn small_params() -> ForestParams {
        ForestParams {
            n_trees: 30,
            ..Default::default()
        }
    }

    #[test]
    fn learns_nonlinear_boundary() {
        let (x, y) = ring_data(1, 300);
        let model = fit(&small_params(), &x, &y, 7).unwrap();
        let p = model.predict_proba(&x).unwrap();
        let pred: Vec<usize> = (0..x.n_rows()).map(|i| argmax_tie_low(p.row(i))).collect();
        let acc = crate::metrics::accuracy(&y, &pred).unwrap();
        assert!(acc > 0.95, "accuracy {acc}");
    }

    #[test]
    fn probabilities_are_tree_averages() {
        let (x, y) = ring_data(2, 100);
        let model = fit(&small_params(), &x, &y, 3).unwrap();
        let p = model.predict_proba(&x).unwrap();
        let mut manual = Matrix::zeros(x.n_rows(), 2);
        for t in &model.trees {
            let tp = t.predict_proba(&x).unwrap();
            for (m, v) in manual.data_mut().iter_mut().zip(tp.data()) {
                *m += v;
            }
        }
        for m in manual.data_mut() {
            *m /= model.trees.len() as f64;
        }
        for (a, b) in p.data().iter().zip(manual.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_determinism_and_divergence() {
        let (x, y) = ring_data(3, 120);
        let a = fit(&small_params(), &x, &y, 11).unwrap();
        let b = fit(&small_params(), &x, &y, 11).unwrap();
        assert_eq!(a, b);
        let c = fit(&small_params(), &x, &y, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn importances_find_the_signal() {
        // feature 0 carries the label, features 1-3 are noise
        let mut rng = RngStream::seeded(4);
        let n = 200;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let signal = rng.normal();
            rows.push(vec![signal, rng.normal(), rng.normal(), rng.normal()]);
            y.push(usize::from(signal > 0.0));
        }
        let x = Matrix::from_rows(rows).unwrap();
        let model = fit(&small_params(), &x, &y, 5).unwrap();
        let imp = &model.importances;
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(
            imp[0] > imp[1] && imp[0] > imp[2] && imp[0] > imp[3],
            "importances {imp:?}"
        );
        assert!(imp[0] > 0.5, "importances {imp:?}");
    }

    #[test]
    fn max_features_one_still_works() {
        let (x, y) = ring_data(5, 80);
        let params = ForestParams {
            n_trees: 10,
            max_features: Some(1),
            ..Default::default()
        };
        let model = fit(&params, &x, &y, 1).unwrap();
        assert_eq!(model.trees.len(), 10);
    }

    #[test]
    fn zero_trees_rejected() {
        let (x, y) = ring_data(6, 20);
        let params = ForestParams {
            n_trees: 0,
            ..Default::default()
        };
        assert!(fit(&params, &x, &y, 0).is_err());
    }
}
