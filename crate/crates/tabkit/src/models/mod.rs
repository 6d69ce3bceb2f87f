//! Classifiers under one contract: fit from (features, class codes), then
//! `predict` / `predict_proba`. Every fit is deterministic in its seed.

pub mod forest;
pub mod logreg;
pub mod persist;
pub mod search;
pub mod simple;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::ensembles::{LRForestModel, SVTreeModel};
use crate::error::{Error, Result};
use crate::numkit::Matrix;

pub use forest::{ForestModel, ForestParams};
pub use logreg::{LogregModel, LogregParams};
pub use persist::{
    load_model, load_model_with_names, save_model, save_model_with_names, FORMAT_VERSION,
};
pub use search::{cv_scores, hyper_search, SearchMode, SearchSpec, SearchResult, Trial};
pub use simple::{GnbModel, GnbParams, KnnModel, KnnParams, ZerorModel};
pub use svm::{SvmModel, SvmParams};
pub use tree::{TreeModel, TreeParams};

/// Hyperparameters for every trainable model, tagged by model id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Logreg(LogregParams),
    Dtree(TreeParams),
    Rforest(ForestParams),
    Linsvm(SvmParams),
    Knn(KnnParams),
    Gnb(GnbParams),
    Zeror,
    Lrforest {
        #[serde(default)]
        forest: ForestParams,
        #[serde(default)]
        logreg: LogregParams,
    },
    Svtree {
        #[serde(default)]
        svm: SvmParams,
        #[serde(default)]
        tree: TreeParams,
    },
}

impl ModelParams {
    /// Default hyperparameters for a model id ("logreg", "rforest", ...).
    pub fn default_for(model: &str) -> Result<ModelParams> {
        Ok(match model {
            "logreg" => ModelParams::Logreg(LogregParams::default()),
            "dtree" => ModelParams::Dtree(TreeParams::default()),
            "rforest" => ModelParams::Rforest(ForestParams::default()),
            "linsvm" => ModelParams::Linsvm(SvmParams::default()),
            "knn" => ModelParams::Knn(KnnParams::default()),
            "gnb" => ModelParams::Gnb(GnbParams::default()),
            "zeror" => ModelParams::Zeror,
            "lrforest" => ModelParams::Lrforest {
                forest: ForestParams::default(),
                logreg: LogregParams::default(),
            },
            "svtree" => ModelParams::Svtree {
                svm: SvmParams::default(),
                tree: TreeParams::default(),
            },
            other => {
                return Err(Error::Usage(format!(
                    "unknown model '{other}' (expected one of: logreg, dtree, rforest, \
                     linsvm, knn, gnb, zeror, lrforest, svtree)"
                )))
            }
        })
    }

    pub fn model_id(&self) -> &'static str {
        match self {
            ModelParams::Logreg(_) => "logreg",
            ModelParams::Dtree(_) => "dtree",
            ModelParams::Rforest(_) => "rforest",
            ModelParams::Linsvm(_) => "linsvm",
            ModelParams::Knn(_) => "knn",
            ModelParams::Gnb(_) => "gnb",
            ModelParams::Zeror => "zeror",
            ModelParams::Lrforest { .. } => "lrforest",
            ModelParams::Svtree { .. } => "svtree",
        }
    }

    /// Return a copy with one named hyperparameter replaced. Integer-valued
    /// parameters are rounded; `max_depth: 0` means unlimited. Ensemble
    /// parameters are namespaced (`forest.n_trees`, `logreg.l2`, `svm.c`,
    /// `tree.max_depth`).
    pub fn with_param(&self, key: &str, value: f64) -> Result<ModelParams> {
        fn as_usize(v: f64) -> usize {
            v.round().max(0.0) as usize
        }
        fn depth(v: f64) -> Option<usize> {
            let d = as_usize(v);
            (d > 0).then_some(d)
        }
        let unknown = |valid: &str| {
            Err(Error::Usage(format!(
                "unknown hyperparameter '{key}' (valid: {valid})"
            )))
        };
        let mut p = self.clone();
        match &mut p {
            ModelParams::Logreg(lp) => match key {
                "learning_rate" => lp.learning_rate = value,
                "epochs" => lp.epochs = as_usize(value),
                "l2" => lp.l2 = value,
                _ => return unknown("learning_rate, epochs, l2"),
            },
            ModelParams::Dtree(tp) => match key {
                "max_depth" => tp.max_depth = depth(value),
                "min_samples_split" => tp.min_samples_split = as_usize(value),
                _ => return unknown("max_depth, min_samples_split"),
            },
            ModelParams::Rforest(fp) => match key {
                "n_trees" => fp.n_trees = as_usize(value),
                "max_depth" => fp.max_depth = depth(value),
                "min_samples_split" => fp.min_samples_split = as_usize(value),
                "max_features" => fp.max_features = (value > 0.0).then(|| as_usize(value)),
                _ => return unknown("n_trees, max_depth, min_samples_split, max_features"),
            },
            ModelParams::Linsvm(sp) => match key {
                "c" => sp.c = value,
                "learning_rate" => sp.learning_rate = value,
                "epochs" => sp.epochs = as_usize(value),
                _ => return unknown("c, learning_rate, epochs"),
            },
            ModelParams::Knn(kp) => match key {
                "k" => kp.k = as_usize(value),
                _ => return unknown("k"),
            },
            ModelParams::Gnb(gp) => match key {
                "var_smoothing" => gp.var_smoothing = value,
                _ => return unknown("var_smoothing"),
            },
            ModelParams::Zeror => return unknown("(zeror has no hyperparameters)"),
            ModelParams::Lrforest { forest, logreg } => match key.split_once('.') {
                Some(("forest", sub)) => {
                    let inner = ModelParams::Rforest(forest.clone()).with_param(sub, value)?;
                    if let ModelParams::Rforest(fp) = inner {
                        *forest = fp;
                    }
                }
                Some(("logreg", sub)) => {
                    let inner = ModelParams::Logreg(logreg.clone()).with_param(sub, value)?;
                    if let ModelParams::Logreg(lp) = inner {
                        *logreg = lp;
                    }
                }
                _ => return unknown("forest.*, logreg.*"),
            },
            ModelParams::Svtree { svm, tree } => match key.split_once('.') {
                Some(("svm", sub)) => {
                    let inner = ModelParams::Linsvm(svm.clone()).with_param(sub, value)?;
                    if let ModelParams::Linsvm(sp) = inner {
                        *svm = sp;
                    }
                }
                Some(("tree", sub)) => {
                    let inner = ModelParams::Dtree(tree.clone()).with_param(sub, value)?;
                    if let ModelParams::Dtree(tp) = inner {
                        *tree = tp;
                    }
                }
                _ => return unknown("svm.*, tree.*"),
            },
        }
        Ok(p)
    }
}

/// A fitted classifier of any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ClassifierModel {
    Logreg(LogregModel),
    Dtree(TreeModel),
    Rforest(ForestModel),
    Linsvm(SvmModel),
    Knn(KnnModel),
    Gnb(GnbModel),
    Zeror(ZerorModel),
    Lrforest(LRForestModel),
    Svtree(SVTreeModel),
}

/// Validate a training pair: matching lengths, finite features, and at
/// least two classes (ZeroR is exempt from the class check). Returns the
/// class count, max code + 1.
pub fn check_xy(x: &Matrix, y: &[usize], allow_single_class: bool) -> Result<usize> {
    if x.n_rows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows vs {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset("no training rows".into()));
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix".into()));
    }
    let k = y.iter().copied().max().unwrap() + 1;
    let distinct = {
        let mut seen = vec![false; k];
        for &c in y {
            seen[c] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 && !allow_single_class {
        return Err(Error::SingleClass);
    }
    Ok(k)
}

pub(crate) fn check_predict_input(x: &Matrix, n_features: usize) -> Result<()> {
    if x.n_cols() != n_features {
        return Err(Error::ShapeMismatch(format!(
            "model expects {n_features} features, input has {}",
            x.n_cols()
        )));
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix".into()));
    }
    Ok(())
}

/// Fit any model from its hyperparameters. The seed feeds every stochastic
/// choice; deterministic models ignore it.
pub fn fit(params: &ModelParams, x: &Matrix, y: &[usize], seed: u64) -> Result<ClassifierModel> {
    Ok(match params {
        ModelParams::Logreg(p) => ClassifierModel::Logreg(logreg::fit(p, x, y)?),
        ModelParams::Dtree(p) => ClassifierModel::Dtree(tree::fit(p, x, y)?),
        ModelParams::Rforest(p) => ClassifierModel::Rforest(forest::fit(p, x, y, seed)?),
        ModelParams::Linsvm(p) => ClassifierModel::Linsvm(svm::fit(p, x, y)?),
        ModelParams::Knn(p) => ClassifierModel::Knn(simple::fit_knn(p, x, y)?),
        ModelParams::Gnb(p) => ClassifierModel::Gnb(simple::fit_gnb(p, x, y)?),
        ModelParams::Zeror => ClassifierModel::Zeror(simple::fit_zeror(x, y)?),
        ModelParams::Lrforest { forest, logreg } => ClassifierModel::Lrforest(
            crate::ensembles::lrforest_fit(forest, logreg, x, y, seed)?,
        ),
        ModelParams::Svtree { svm, tree } => {
            ClassifierModel::Svtree(crate::ensembles::svtree_fit(svm, tree, x, y, seed)?)
        }
    })
}

impl ClassifierModel {
    pub fn model_id(&self) -> &'static str {
        match self {
            ClassifierModel::Logreg(_) => "logreg",
            ClassifierModel::Dtree(_) => "dtree",
            ClassifierModel::Rforest(_) => "rforest",
            ClassifierModel::Linsvm(_) => "linsvm",
            ClassifierModel::Knn(_) => "knn",
            ClassifierModel::Gnb(_) => "gnb",
            ClassifierModel::Zeror(_) => "zeror",
            ClassifierModel::Lrforest(_) => "lrforest",
            ClassifierModel::Svtree(_) => "svtree",
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            ClassifierModel::Logreg(m) => m.n_classes,
            ClassifierModel::Dtree(m) => m.n_classes,
            ClassifierModel::Rforest(m) => m.n_classes,
            ClassifierModel::Linsvm(m) => m.n_classes,
            ClassifierModel::Knn(m) => m.n_classes,
            ClassifierModel::Gnb(m) => m.n_classes,
            ClassifierModel::Zeror(m) => m.n_classes,
            ClassifierModel::Lrforest(m) => m.n_classes(),
            ClassifierModel::Svtree(m) => m.n_classes(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ClassifierModel::Logreg(m) => m.n_features(),
            ClassifierModel::Dtree(m) => m.n_features,
            ClassifierModel::Rforest(m) => m.n_features,
            ClassifierModel::Linsvm(m) => m.n_features(),
            ClassifierModel::Knn(m) => m.n_features(),
            ClassifierModel::Gnb(m) => m.n_features(),
            ClassifierModel::Zeror(m) => m.n_features,
            ClassifierModel::Lrforest(m) => m.n_features(),
            ClassifierModel::Svtree(m) => m.n_features(),
        }
    }

    /// Class probabilities, one row per input, columns summing to 1.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            ClassifierModel::Logreg(m) => m.predict_proba(x),
            ClassifierModel::Dtree(m) => m.predict_proba(x),
            ClassifierModel::Rforest(m) => m.predict_proba(x),
            ClassifierModel::Linsvm(m) => m.predict_proba(x),
            ClassifierModel::Knn(m) => m.predict_proba(x),
            ClassifierModel::Gnb(m) => m.predict_proba(x),
            ClassifierModel::Zeror(m) => m.predict_proba(x),
            ClassifierModel::Lrforest(m) => m.predict_proba(x),
            ClassifierModel::Svtree(m) => m.predict_proba(x),
        }
    }

    /// Predicted class codes; probability ties break toward the lower code.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        match self {
            // margin argmax and proba argmax agree, but margins are cheaper
            ClassifierModel::Linsvm(m) => m.predict(x),
            other => {
                let p = other.predict_proba(x)?;
                Ok((0..p.n_rows())
                    .map(|i| crate::numkit::stats::argmax_tie_low(p.row(i)))
                    .collect())
            }
        }
    }

    /// Impurity-based importances where the model has them.
    pub fn feature_importances(&self) -> Option<&[f64]> {
        match self {
            ClassifierModel::Dtree(m) => Some(&m.importances),
            ClassifierModel::Rforest(m) => Some(&m.importances),
            ClassifierModel::Lrforest(m) => Some(&m.forest.importances),
            _ => None,
        }
    }

    /// The hyperparameters the model was fit with, so flows that retrain
    /// (drop-column importances, CV on a saved model) can replay the fit.
    pub fn refit_params(&self) -> ModelParams {
        match self {
            ClassifierModel::Logreg(m) => ModelParams::Logreg(m.params.clone()),
            ClassifierModel::Dtree(m) => ModelParams::Dtree(m.params.clone()),
            ClassifierModel::Rforest(m) => ModelParams::Rforest(m.params.clone()),
            ClassifierModel::Linsvm(m) => ModelParams::Linsvm(m.params.clone()),
            ClassifierModel::Knn(m) => ModelParams::Knn(m.params.clone()),
            ClassifierModel::Gnb(m) => ModelParams::Gnb(m.params.clone()),
            ClassifierModel::Zeror(_) => ModelParams::Zeror,
            ClassifierModel::Lrforest(m) => ModelParams::Lrforest {
                forest: m.forest.params.clone(),
                logreg: m.meta.params.clone(),
            },
            ClassifierModel::Svtree(m) => ModelParams::Svtree {
                svm: m.svm.params.clone(),
                tree: m.meta.params.clone(),
            },
        }
    }
}

/// Fit-then-score convenience used by CV and search.
pub fn fit_accuracy(
    params: &ModelParams,
    x_train: &Matrix,
    y_train: &[usize],
    x_test: &Matrix,
    y_test: &[usize],
    seed: u64,
) -> Result<f64> {
    let model = fit(params, x_train, y_train, seed)?;
    let pred = model.predict(x_test)?;
    crate::metrics::accuracy(y_test, &pred)
}
