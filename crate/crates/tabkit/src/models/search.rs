//! Cross-validation, hyperparameter search, and learning curves.

use serde::{Deserialize, Serialize};

use crate::data::kfold_splits;
use crate::error::{Error, Result};
use crate::metrics::CurveData;
use crate::models::{fit, fit_accuracy, ModelParams};
use crate::numkit::{Matrix, RngStream};

/// Per-fold accuracies of a model under k-fold CV. The same seed drives the
/// fold assignment and every fold's fit.
pub fn cv_scores(
    params: &ModelParams,
    x: &Matrix,
    y: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let splits = kfold_splits(x.n_rows(), folds, seed)?;
    let mut scores = Vec::with_capacity(folds);
    for (train_idx, test_idx) in &splits {
        let xt = x.select_rows(train_idx);
        let yt: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        let xe = x.select_rows(test_idx);
        let ye: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();
        scores.push(fit_accuracy(params, &xt, &yt, &xe, &ye, seed)?);
    }
    Ok(scores)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Every combination of axis values, first axis slowest.
    Grid,
    /// n_iter independent draws, each axis sampled uniformly (with
    /// replacement across trials).
    Random { n_iter: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchSpec {
    pub base: ModelParams,
    /// (hyperparameter key, candidate values); see `ModelParams::with_param`
    /// for the key grammar.
    pub axes: Vec<(String, Vec<f64>)>,
    pub mode: SearchMode,
    pub folds: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trial {
    pub assignment: Vec<(String, f64)>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_params: ModelParams,
    pub best_assignment: Vec<(String, f64)>,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

fn grid_assignments(axes: &[(String, Vec<f64>)]) -> Result<Vec<Vec<(String, f64)>>> {
    if axes.iter().any(|(_, values)| values.is_empty()) {
        return Err(Error::EmptySearchSpace);
    }
    let mut out: Vec<Vec<(String, f64)>> = vec![vec![]];
    for (key, values) in axes {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for prefix in &out {
            for &v in values {
                let mut a = prefix.clone();
                a.push((key.clone(), v));
                next.push(a);
            }
        }
        out = next;
    }
    Ok(out)
}

fn random_assignments(
    axes: &[(String, Vec<f64>)],
    n_iter: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vec<(String, f64)>>> {
    if n_iter == 0 || axes.iter().any(|(_, vs)| vs.is_empty()) {
        return Err(Error::EmptySearchSpace);
    }
    Ok((0..n_iter)
        .map(|_| {
            axes.iter()
                .map(|(k, vs)| (k.clone(), vs[rng.next_below(vs.len())]))
                .collect()
        })
        .collect())
}

/// Evaluate candidate hyperparameter assignments by k-fold CV mean accuracy.
/// All candidates share the same folds; ties keep the earliest trial.
pub fn hyper_search(spec: &SearchSpec, x: &Matrix, y: &[usize]) -> Result<SearchResult> {
    let assignments = match spec.mode {
        SearchMode::Grid => grid_assignments(&spec.axes)?,
        SearchMode::Random { n_iter } => {
            let mut rng = RngStream::seeded(spec.seed);
            random_assignments(&spec.axes, n_iter, &mut rng)?
        }
    };
    let mut trials = Vec::with_capacity(assignments.len());
    let mut best: Option<usize> = None;
    for assignment in assignments {
        let mut params = spec.base.clone();
        for (k, v) in &assignment {
            params = params.with_param(k, *v)?;
        }
        let fold_accuracies = cv_scores(&params, x, y, spec.folds, spec.seed)?;
        let mean_accuracy =
            fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
        trials.push(Trial {
            assignment,
            fold_accuracies,
            mean_accuracy,
        });
        let i = trials.len() - 1;
        if best.map_or(true, |b| trials[i].mean_accuracy > trials[b].mean_accuracy) {
            best = Some(i);
        }
    }
    let b = best.ok_or(Error::EmptySearchSpace)?;
    let mut best_params = spec.base.clone();
    for (k, v) in &trials[b].assignment {
        best_params = best_params.with_param(k, *v)?;
    }
    Ok(SearchResult {
        best_params,
        best_assignment: trials[b].assignment.clone(),
        best_score: trials[b].mean_accuracy,
        trials,
    })
}

/// Accuracy as a function of training-set size. One seeded shuffle sets
/// aside a test fraction; nested prefixes of the remaining rows are fit per
/// requested fraction. Returns (train curve, test curve) with subset size
/// on the x axis.
pub fn learning_curve(
    params: &ModelParams,
    x: &Matrix,
    y: &[usize],
    fractions: &[f64],
    test_fraction: f64,
    seed: u64,
) -> Result<(CurveData, CurveData)> {
    let n = x.n_rows();
    if n < 4 {
        return Err(Error::EmptyDataset(format!(
            "{n} rows is too few for a learning curve"
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::BadTestFraction(test_fraction));
    }
    if fractions.is_empty() {
        return Err(Error::Usage("no training fractions given".into()));
    }
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Usage(format!(
                "training fraction {f} outside (0, 1]"
            )));
        }
    }
    let mut rng = RngStream::seeded(seed);
    let perm = rng.permutation(n);
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 2);
    let test_idx = &perm[..n_test];
    let train_pool = &perm[n_test..]; // stays shuffled so prefixes nest
    let x_test = x.select_rows(test_idx);
    let y_test: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();

    let mut sizes = Vec::new();
    let mut train_acc = Vec::new();
    let mut test_acc = Vec::new();
    for &f in fractions {
        let m = ((train_pool.len() as f64 * f).round() as usize).clamp(2, train_pool.len());
        let subset = &train_pool[..m];
        let xs = x.select_rows(subset);
        let ys: Vec<usize> = subset.iter().map(|&i| y[i]).collect();
        let model = fit(params, &xs, &ys, seed)?;
        sizes.push(m as f64);
        train_acc.push(crate::metrics::accuracy(
            &ys,
            &model.predict(&xs)?,
        )?);
        test_acc.push(crate::metrics::accuracy(
            &y_test,
            &model.predict(&x_test)?,
        )?);
    }
    Ok((
        CurveData {
            label: "train".into(),
            x: sizes.clone(),
            y: train_acc,
            thresholds: None,
            auc: None,
        },
        CurveData {
            label: "test".into(),
            x: sizes,
            y: test_acc,
            thresholds: None,
            auc: None,
        },
    ))
}
