//! Threshold-sweep curves (ROC, precision-recall) and their areas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A plottable curve. `x`/`y` are the points in sweep order; `thresholds`
/// aligns with the points when the curve came from a score sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveData {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

fn check_binary(y_true: &[usize], scores: &[f64]) -> Result<(f64, f64)> {
    if y_true.len() != scores.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels vs {} scores",
            y_true.len(),
            scores.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyDataset("no labels to score".into()));
    }
    if let Some(bad) = y_true.iter().find(|&&c| c > 1) {
        return Err(Error::Data(format!(
            "curve metrics need binary labels in {{0,1}}, found {bad}"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score".into()));
    }
    let pos = y_true.iter().filter(|&&c| c == 1).count() as f64;
    let neg = y_true.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::Data(
            "curve metrics need both classes present".into(),
        ));
    }
    Ok((pos, neg))
}

fn descending_unique(scores: &[f64]) -> Vec<f64> {
    let mut t = scores.to_vec();
    t.sort_by(|a, b| b.partial_cmp(a).unwrap());
    t.dedup();
    t
}

/// Area under a piecewise-linear curve by the trapezoid rule. `x` need not
/// be strictly increasing (flat segments contribute nothing).
pub fn trapezoid_area(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) / 2.0)
        .sum()
}

/// ROC curve: predict positive where score ≥ threshold, sweeping thresholds
/// from high to low. Starts at (0,0) with an infinite threshold sentinel and
/// ends at (1,1). AUC is the trapezoid area over FPR.
pub fn roc_curve(y_true: &[usize], scores: &[f64]) -> Result<CurveData> {
    let (pos, neg) = check_binary(y_true, scores)?;
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let mut thresholds = vec![f64::INFINITY];
    for t in descending_unique(scores) {
        let mut tp = 0.0;
        let mut fp = 0.0;
        for (&c, &s) in y_true.iter().zip(scores) {
            if s >= t {
                if c == 1 {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        fpr.push(fp / neg);
        tpr.push(tp / pos);
        thresholds.push(t);
    }
    let auc = trapezoid_area(&fpr, &tpr);
    Ok(CurveData {
        label: "roc".into(),
        x: fpr,
        y: tpr,
        thresholds: Some(thresholds),
        auc: Some(auc),
    })
}

/// Precision-recall curve over the same descending-threshold sweep. Starts
/// at (recall 0, precision 1). AUC is the trapezoid area over recall.
pub fn pr_curve(y_true: &[usize], scores: &[f64]) -> Result<CurveData> {
    let (pos, _) = check_binary(y_true, scores)?;
    let mut recall = vec![0.0];
    let mut precision = vec![1.0];
    let mut thresholds = vec![f64::INFINITY];
    for t in descending_unique(scores) {
        let mut tp = 0.0;
        let mut predicted = 0.0;
        for (&c, &s) in y_true.iter().zip(scores) {
            if s >= t {
                predicted += 1.0;
                if c == 1 {
                    tp += 1.0;
                }
            }
        }
        recall.push(tp / pos);
        precision.push(if predicted == 0.0 { 1.0 } else { tp / predicted });
        thresholds.push(t);
    }
    let auc = trapezoid_area(&recall, &precision);
    Ok(CurveData {
        label: "pr".into(),
        x: recall,
        y: precision,
        thresholds: Some(thresholds),
        auc: Some(auc),
    })
}

/// Probability that a random positive outscores a random negative, ties
/// counting half: the Mann-Whitney statistic. Equals trapezoidal ROC AUC.
pub fn mannwhitney_auc(y_true: &[usize], scores: &[f64]) -> Result<f64> {
    check_binary(y_true, scores)?;
    let pos: Vec<f64> = y_true
        .iter()
        .zip(scores)
        .filter(|(&c, _)| c == 1)
        .map(|(_, &s)| s)
        .collect();
    let neg: Vec<f64> = y_true
        .iter()
        .zip(scores)
        .filter(|(&c, _)| c == 0)
        .map(|(_, &s)| s)
        .collect();
    let mut wins = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos.len() * neg.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;
    use proptest::prelude::*;

    const Y: [usize; 4] = [0, 0, 1, 1];
    const S: [f64; 4] = [0.1, 0.4, 0.35, 0.8];

    #[test]
    fn roc_textbook_example() {
        let c = roc_curve(&Y, &S).unwrap();
        assert_eq!(c.x, vec![0.0, 0.0, 0.5, 0.5, 1.0]);
        assert_eq!(c.y, vec![0.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(
            c.thresholds.unwrap(),
            vec![f64::INFINITY, 0.8, 0.4, 0.35, 0.1]
        );
        assert!((c.auc.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn pr_textbook_example() {
        let c = pr_curve(&Y, &S).unwrap();
        assert_eq!(c.x, vec![0.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(c.y, vec![1.0, 1.0, 0.5, 2.0 / 3.0, 0.5]);
        // hand trapezoid: 0.5 + 0 + 0.5*(0.5 + 2/3)/2 + 0 = 19/24
        assert!((c.auc.unwrap() - 19.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_inverted_separation() {
        let y = [0, 0, 1, 1];
        let perfect = roc_curve(&y, &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert_eq!(perfect.auc.unwrap(), 1.0);
        let inverted = roc_curve(&y, &[0.9, 0.8, 0.2, 0.1]).unwrap();
        assert_eq!(inverted.auc.unwrap(), 0.0);
    }

    #[test]
    fn tied_scores_count_half() {
        let y = [0, 1];
        let c = roc_curve(&y, &[0.5, 0.5]).unwrap();
        assert!((c.auc.unwrap() - 0.5).abs() < 1e-12);
        assert!((mannwhitney_auc(&y, &[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(roc_curve(&[1, 1], &[0.1, 0.2]).is_err());
        assert!(roc_curve(&[0, 0], &[0.1, 0.2]).is_err());
        assert!(roc_curve(&[0, 2], &[0.1, 0.2]).is_err());
        assert!(roc_curve(&[0, 1], &[0.1]).is_err());
        assert!(roc_curve(&[0, 1], &[f64::NAN, 0.2]).is_err());
    }

    proptest! {
        // The sweep-based trapezoid AUC must equal pairwise concordance exactly.
        #[test]
        fn roc_auc_equals_concordance(seed in 0u64..500, n in 4usize..80) {
            let mut rng = RngStream::seeded(seed);
            let y: Vec<usize> = (0..n).map(|_| usize::from(rng.next_f64() < 0.4)).collect();
            prop_assume!(y.iter().any(|&c| c == 0) && y.iter().any(|&c| c == 1));
            // coarse grid to force plenty of ties
            let s: Vec<f64> = (0..n).map(|_| (rng.next_f64() * 8.0).floor() / 8.0).collect();
            let auc = roc_curve(&y, &s).unwrap().auc.unwrap();
            let mw = mannwhitney_auc(&y, &s).unwrap();
            prop_assert!((auc - mw).abs() < 1e-12, "auc {} vs concordance {}", auc, mw);
        }

        #[test]
        fn curves_are_monotone_where_required(seed in 0u64..200) {
            let mut rng = RngStream::seeded(seed);
            let n = 50;
            let y: Vec<usize> = (0..n).map(|_| usize::from(rng.next_f64() < 0.5)).collect();
            prop_assume!(y.iter().any(|&c| c == 0) && y.iter().any(|&c| c == 1));
            let s: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let roc = roc_curve(&y, &s).unwrap();
            for w in roc.x.windows(2) { prop_assert!(w[1] >= w[0]); }
            for w in roc.y.windows(2) { prop_assert!(w[1] >= w[0]); }
            prop_assert_eq!(*roc.x.last().unwrap(), 1.0);
            prop_assert_eq!(*roc.y.last().unwrap(), 1.0);
            let pr = pr_curve(&y, &s).unwrap();
            for w in pr.x.windows(2) { prop_assert!(w[1] >= w[0]); }
            for v in &pr.y { prop_assert!((0.0..=1.0).contains(v)); }
        }
    }
}
