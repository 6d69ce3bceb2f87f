//! Train/test splitting and k-fold cross-validation indices.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numkit::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            stratified: false,
            seed: 0,
        }
    }
}

fn test_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n.saturating_sub(1))
}

/// Split into (train, test). Row assignment is a seeded shuffle; each side
/// keeps the original row order. Stratified splits hold the class mix, and
/// need every class to have at least 2 members.
pub fn train_test_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::EmptyDataset(format!("{n} rows cannot be split")));
    }
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::BadTestFraction(spec.test_fraction));
    }
    let mut rng = RngStream::seeded(spec.seed);
    let mut test_idx: Vec<usize> = if spec.stratified {
        let y = ds.labels()?;
        let classes = y.iter().copied().max().map_or(0, |m| m + 1);
        let class_names = ds.class_names()?;
        let mut picked = Vec::new();
        for c in 0..classes {
            let members: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::SingletonClass(
                    class_names.get(c).cloned().unwrap_or_else(|| c.to_string()),
                ));
            }
            let k = test_count(members.len(), spec.test_fraction);
            let chosen = rng.choose_indices(k, members.len());
            picked.extend(chosen.into_iter().map(|j| members[j]));
        }
        picked
    } else {
        let k = test_count(n, spec.test_fraction);
        rng.choose_indices(k, n)
    };
    test_idx.sort_unstable();
    let in_test: Vec<bool> = {
        let mut mask = vec![false; n];
        for &i in &test_idx {
            mask[i] = true;
        }
        mask
    };
    let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::BadTestFraction(spec.test_fraction));
    }
    Ok((ds.select_rows(&train_idx), ds.select_rows(&test_idx)))
}

/// k-fold CV indices over n rows: (train, test) per fold. Rows are shuffled
/// with the seed, then dealt into folds whose sizes differ by at most one;
/// each row lands in exactly one test fold. Indices are sorted within folds.
pub fn kfold_splits(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || k > n {
        return Err(Error::BadFoldCount { k, n });
    }
    let mut rng = RngStream::seeded(seed);
    let perm = rng.permutation(n);
    let base = n / k;
    let extra = n % k;
    let mut folds: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold: Vec<usize> = perm[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok((0..k)
        .map(|f| {
            let test = folds[f].clone();
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect();
            train.sort_unstable();
            (train, test)
        })
        .collect())
}
