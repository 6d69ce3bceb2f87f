//! Stacking ensembles: a base model's per-class outputs are appended to the
//! original features as new columns, and a meta model is fit on the widened
//! matrix. Prediction recomputes the augmentation with the stored base model.
//!
//! The augmented columns are used as-is — no re-standardization — and the
//! meta model trains on the same rows the base model saw.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{forest, logreg, svm, tree};
use crate::models::{ForestModel, ForestParams, LogregModel, LogregParams, SvmModel, SvmParams, TreeModel, TreeParams};
use crate::numkit::{Matrix, RngStream};

/// Random-forest base whose class probabilities feed a logistic-regression
/// meta model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LRForestModel {
    pub forest: ForestModel,
    pub meta: LogregModel,
}

/// Linear-SVM base whose one-vs-rest margins feed a decision-tree meta model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SVTreeModel {
    pub svm: SvmModel,
    pub meta: TreeModel,
}

fn augment(x: &Matrix, new_cols: &Matrix) -> Result<Matrix> {
    x.hstack(new_cols)
}

/// The base model trains from child stream 0 of the seed; the meta stage
/// (deterministic here) owns child stream 1 by convention.
pub fn lrforest_fit(
    forest_params: &ForestParams,
    logreg_params: &LogregParams,
    x: &Matrix,
    y: &[usize],
    seed: u64,
) -> Result<LRForestModel> {
    let root = RngStream::seeded(seed);
    let forest = forest::fit_with_stream(forest_params, x, y, &root.split(0))?;
    let p = forest.predict_proba(x)?;
    let meta = logreg::fit(logreg_params, &augment(x, &p)?, y)?;
    Ok(LRForestModel { forest, meta })
}

pub fn svtree_fit(
    svm_params: &SvmParams,
    tree_params: &TreeParams,
    x: &Matrix,
    y: &[usize],
    _seed: u64,
) -> Result<SVTreeModel> {
    let svm = svm::fit(svm_params, x, y)?;
    let margins = svm.decision_function(x)?;
    let meta = tree::fit(tree_params, &augment(x, &margins)?, y)?;
    Ok(SVTreeModel { svm, meta })
}

impl LRForestModel {
    pub fn n_features(&self) -> usize {
        self.forest.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.forest.n_classes
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        if x.n_cols() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} features, input has {}",
                self.n_features(),
                x.n_cols()
            )));
        }
        let p = self.forest.predict_proba(x)?;
        self.meta.predict_proba(&augment(x, &p)?)
    }
}

impl SVTreeModel {
    pub fn n_features(&self) -> usize {
        self.svm.n_features()
    }

    pub fn n_classes(&self) -> usize {
        self.svm.n_classes
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        if x.n_cols() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} features, input has {}",
                self.n_features(),
                x.n_cols()
            )));
        }
        let margins = self.svm.decision_function(x)?;
        self.meta.predict_proba(&augment(x, &margins)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::stats::argmax_tie_low;

    /// Mixed linear + interaction signal: linear models miss the interaction,
    /// trees miss nothing but benefit from margins/probabilities as features.
    fn mixed_data(seed: u64, n: usize) -> (Matrix, Vec<usize>) {
        let mut rng = RngStream::seeded(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let v: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
            let score = 1.2 * v[0] - 0.8 * v[1] + 2.0 * (v[2] * v[3]).signum();
            rows.push(v);
            y.push(usize::from(score > 0.0));
        }
        (Matrix::from_rows(rows).unwrap(), y)
    }

    fn predict(p: &Matrix) -> Vec<usize> {
        (0..p.n_rows()).map(|i| argmax_tie_low(p.row(i))).collect()
    }

    #[test]
    fn lrforest_fits_and_beats_plain_logreg() {
        let (x, y) = mixed_data(1, 400);
        let fp = ForestParams {
            n_trees: 40,
            ..Default::default()
        };
        let model = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 7).unwrap();
        let acc_ens =
            crate::metrics::accuracy(&y, &predict(&model.predict_proba(&x).unwrap())).unwrap();
        let plain = logreg::fit(&LogregParams::default(), &x, &y).unwrap();
        let acc_plain =
            crate::metrics::accuracy(&y, &predict(&plain.predict_proba(&x).unwrap())).unwrap();
        assert!(
            acc_ens > acc_plain,
            "ensemble {acc_ens} vs plain {acc_plain}"
        );
        assert!(acc_ens > 0.9, "ensemble accuracy {acc_ens}");
    }

    #[test]
    fn svtree_fits_mixed_signal() {
        let (x, y) = mixed_data(2, 300);
        let model = svtree_fit(&SvmParams::default(), &TreeParams::default(), &x, &y, 3).unwrap();
        let acc =
            crate::metrics::accuracy(&y, &predict(&model.predict_proba(&x).unwrap())).unwrap();
        assert!(acc > 0.9, "accuracy {acc}");
    }

    #[test]
    fn meta_sees_augmented_width() {
        let (x, y) = mixed_data(3, 120);
        let fp = ForestParams {
            n_trees: 10,
            ..Default::default()
        };
        let lr = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 1).unwrap();
        assert_eq!(lr.meta.n_features(), 4 + 2);
        let st = svtree_fit(&SvmParams::default(), &TreeParams::default(), &x, &y, 1).unwrap();
        assert_eq!(st.meta.n_features, 4 + 2);
        // the meta tree actually uses an augmented column somewhere
        let uses_margin_col = st.meta.nodes.iter().any(
            |n| matches!(n, tree::Node::Split { feature, .. } if *feature >= 4),
        );
        assert!(uses_margin_col);
    }

    #[test]
    fn predict_recomputes_augmentation() {
        // predicting the training rows must equal feeding the meta model the
        // stored base outputs directly
        let (x, y) = mixed_data(4, 100);
        let fp = ForestParams {
            n_trees: 15,
            ..Default::default()
        };
        let model = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 9).unwrap();
        let p_api = model.predict_proba(&x).unwrap();
        let aug = x.hstack(&model.forest.predict_proba(&x).unwrap()).unwrap();
        let p_manual = model.meta.predict_proba(&aug).unwrap();
        assert_eq!(p_api, p_manual);
    }

    #[test]
    fn seed_determinism() {
        let (x, y) = mixed_data(5, 150);
        let fp = ForestParams {
            n_trees: 12,
            ..Default::default()
        };
        let a = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 42).unwrap();
        let b = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 42).unwrap();
        assert_eq!(a, b);
        let c = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 43).unwrap();
        assert_ne!(a.forest, c.forest);
    }

    #[test]
    fn wrong_width_rejected() {
        let (x, y) = mixed_data(6, 60);
        let fp = ForestParams {
            n_trees: 5,
            ..Default::default()
        };
        let model = lrforest_fit(&fp, &LogregParams::default(), &x, &y, 0).unwrap();
        assert!(model.predict_proba(&Matrix::zeros(3, 7)).is_err());
    }
}
