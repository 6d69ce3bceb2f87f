//! Evaluation metrics: confusion matrices, classification reports, and
//! threshold-sweep curves.

pub mod classify;
pub mod curves;
pub mod svg;

pub use classify::{
    accuracy, classification_report, confusion_matrix, ClassScores, ClassificationReport,
};
pub use curves::{mannwhitney_auc, pr_curve, roc_curve, trapezoid_area, CurveData};
pub use svg::render_curves_svg;
