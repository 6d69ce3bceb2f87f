//! Confusion matrix and per-class precision/recall/F1 reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Rows are true classes, columns are predictions; entry (i, j) counts
/// samples of class i predicted as j. Size is max class code + 1 across
/// both vectors unless `n_classes` forces more.
pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: Option<usize>,
) -> Result<Matrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyDataset("no labels to score".into()));
    }
    let observed = y_true
        .iter()
        .chain(y_pred)
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let k = n_classes.map_or(observed, |k| k.max(observed));
    let mut m = Matrix::zeros(k, k);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        m.set(t, p, m.get(t, p) + 1.0);
    }
    Ok(m)
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyDataset("no labels to score".into()));
    }
    let hits = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / y_true.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<ClassScores>,
    pub accuracy: f64,
    pub macro_avg: ClassScores,
    pub weighted_avg: ClassScores,
    /// True when any precision/recall/F1 had a zero denominator (reported as 0).
    pub zero_division_hit: bool,
}

/// Per-class precision/recall/F1 plus macro and support-weighted averages.
/// Zero denominators score 0 and set `zero_division_hit`.
pub fn classification_report(
    y_true: &[usize],
    y_pred: &[usize],
    class_names: Option<&[String]>,
) -> Result<ClassificationReport> {
    let cm = confusion_matrix(y_true, y_pred, class_names.map(|ns| ns.len()))?;
    let k = cm.n_rows();
    let mut zero_hit = false;
    let mut ratio = |num: f64, den: f64| -> f64 {
        if den == 0.0 {
            zero_hit = true;
            0.0
        } else {
            num / den
        }
    };

    let mut classes = Vec::with_capacity(k);
    for c in 0..k {
        let tp = cm.get(c, c);
        let support: f64 = cm.row(c).iter().sum();
        let predicted: f64 = (0..k).map(|r| cm.get(r, c)).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        let label = class_names
            .and_then(|ns| ns.get(c).cloned())
            .unwrap_or_else(|| c.to_string());
        classes.push(ClassScores {
            label,
            precision,
            recall,
            f1,
            support: support as usize,
        });
    }

    let total: usize = classes.iter().map(|c| c.support).sum();
    let kf = k as f64;
    let macro_avg = ClassScores {
        label: "macro avg".into(),
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / kf,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / kf,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / kf,
        support: total,
    };
    let wsum = |f: fn(&ClassScores) -> f64| {
        classes
            .iter()
            .map(|c| f(c) * c.support as f64)
            .sum::<f64>()
            / total as f64
    };
    let weighted_avg = ClassScores {
        label: "weighted avg".into(),
        precision: wsum(|c| c.precision),
        recall: wsum(|c| c.recall),
        f1: wsum(|c| c.f1),
        support: total,
    };

    Ok(ClassificationReport {
        classes,
        accuracy: accuracy(y_true, y_pred)?,
        macro_avg,
        weighted_avg,
        zero_division_hit: zero_hit,
    })
}

impl ClassificationReport {
    pub fn f1_macro(&self) -> f64 {
        self.macro_avg.f1
    }

    /// Fixed-width text table.
    pub fn render_text(&self) -> String {
        let label_w = self
            .classes
            .iter()
            .map(|c| c.label.len())
            .chain(["weighted avg".len(), "accuracy".len()])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        out.push_str(&format!(
            "{:>label_w$}  {:>9}  {:>9}  {:>9}  {:>9}\n\n",
            "", "precision", "recall", "f1-score", "support"
        ));
        for c in &self.classes {
            out.push_str(&format!(
                "{:>label_w$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9}\n",
                c.label, c.precision, c.recall, c.f1, c.support
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:>label_w$}  {:>9}  {:>9}  {:>9.3}  {:>9}\n",
            "accuracy", "", "", self.accuracy, self.macro_avg.support
        ));
        for avg in [&self.macro_avg, &self.weighted_avg] {
            out.push_str(&format!(
                "{:>label_w$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9}\n",
                avg.label, avg.precision, avg.recall, avg.f1, avg.support
            ));
        }
        if self.zero_division_hit {
            out.push_str("\nnote: some scores had zero denominators and were reported as 0\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Y_TRUE: [usize; 5] = [0, 1, 2, 2, 0];
    const Y_PRED: [usize; 5] = [0, 0, 2, 1, 0];

    #[test]
    fn confusion_matrix_oracle() {
        let cm = confusion_matrix(&Y_TRUE, &Y_PRED, None).unwrap();
        assert_eq!(
            cm.to_nested(),
            vec![
                vec![2.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 1.0],
            ]
        );
    }

    #[test]
    fn report_matches_hand_computation() {
        let r = classification_report(&Y_TRUE, &Y_PRED, None).unwrap();
        let eps = 1e-12;
        // class 0: tp=2 of 3 predicted, support 2
        assert!((r.classes[0].precision - 2.0 / 3.0).abs() < eps);
        assert!((r.classes[0].recall - 1.0).abs() < eps);
        assert!((r.classes[0].f1 - 0.8).abs() < eps);
        // class 1: nothing right
        assert_eq!(r.classes[1].precision, 0.0);
        assert_eq!(r.classes[1].recall, 0.0);
        assert_eq!(r.classes[1].f1, 0.0);
        // class 2
        assert!((r.classes[2].precision - 1.0).abs() < eps);
        assert!((r.classes[2].recall - 0.5).abs() < eps);
        assert!((r.classes[2].f1 - 2.0 / 3.0).abs() < eps);

        assert!((r.accuracy - 0.6).abs() < eps);
        assert!((r.macro_avg.precision - 5.0 / 9.0).abs() < eps);
        assert!((r.macro_avg.recall - 0.5).abs() < eps);
        assert!((r.macro_avg.f1 - 22.0 / 45.0).abs() < eps);
        assert!((r.weighted_avg.precision - 2.0 / 3.0).abs() < eps);
        assert!((r.weighted_avg.recall - 0.6).abs() < eps);
        assert!((r.weighted_avg.f1 - 44.0 / 75.0).abs() < eps);
        assert!(r.zero_division_hit);
        assert_eq!(r.macro_avg.support, 5);
    }

    #[test]
    fn perfect_prediction_no_zero_division() {
        let y = [0, 1, 0, 1];
        let r = classification_report(&y, &y, None).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_avg.f1, 1.0);
        assert!(!r.zero_division_hit);
    }

    #[test]
    fn class_names_apply() {
        let r = classification_report(&[0, 1], &[0, 1], Some(&["no".into(), "yes".into()]))
            .unwrap();
        assert_eq!(r.classes[0].label, "no");
        assert_eq!(r.classes[1].label, "yes");
    }

    #[test]
    fn forced_class_count_extends_matrix() {
        let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let r = classification_report(&[0, 1], &[0, 1], Some(&names)).unwrap();
        assert_eq!(r.classes.len(), 3);
        assert_eq!(r.classes[2].support, 0);
        assert!(r.zero_division_hit); // class c has no support
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(confusion_matrix(&[0, 1], &[0], None).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn text_rendering_has_all_sections() {
        let r = classification_report(&Y_TRUE, &Y_PRED, None).unwrap();
        let txt = r.render_text();
        assert!(txt.contains("precision"));
        assert!(txt.contains("accuracy"));
        assert!(txt.contains("macro avg"));
        assert!(txt.contains("weighted avg"));
        assert!(txt.contains("zero denominators"));
    }
}
