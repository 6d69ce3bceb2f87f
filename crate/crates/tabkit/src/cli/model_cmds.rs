//! `train`, `tune`, `evaluate`, `curves`, `export`, `import`.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use super::{
    build_params, envelope, parse_axis, parse_f64_list, resolve_seed, resolve_target, to_value,
    FileCfg, Report,
};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{
    accuracy, classification_report, confusion_matrix, mannwhitney_auc, pr_curve,
    render_curves_svg, roc_curve, CurveData,
};
use crate::models::search::learning_curve;
use crate::models::{
    cv_scores, fit, hyper_search, load_model, load_model_with_names, save_model_with_names,
    ClassifierModel, SearchMode, SearchSpec,
};

fn require_target(target: Option<String>) -> Result<String> {
    target.ok_or_else(|| Error::Usage("--target is required for this command".into()))
}

fn load_training(path: &PathBuf, target: &str) -> Result<Dataset> {
    data::load_csv(path, Some(target))
}

/// Confusion counts as plain integers for JSON.
fn confusion_rows(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<Vec<Vec<u64>>> {
    let m = confusion_matrix(y_true, y_pred, Some(n_classes))?;
    Ok((0..m.n_rows())
        .map(|i| m.row(i).iter().map(|v| *v as u64).collect())
        .collect())
}

/// Re-code labels into the coding a saved model was trained under. CSV class
/// codes follow first appearance, so two files casually disagree; the names
/// stored in the model file are the bridge.
fn align_labels(
    y: &[usize],
    data_names: &[String],
    model_names: Option<&[String]>,
) -> Result<Vec<usize>> {
    let Some(names) = model_names else {
        return Ok(y.to_vec());
    };
    let mut map = Vec::with_capacity(data_names.len());
    for n in data_names {
        let code = names.iter().position(|m| m == n).ok_or_else(|| {
            Error::Data(format!(
                "class `{n}` is not among the model's classes ({})",
                names.join(", ")
            ))
        })?;
        map.push(code);
    }
    Ok(y.iter().map(|&c| map[c]).collect())
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Model kind: logreg, dtree, rforest, linsvm, knn, gnb, zeror, lrforest, svtree
    #[arg(long)]
    model: Option<String>,
    /// Hyperparameter override, e.g. `epochs=200` or `forest.n_trees=50`; repeatable
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn train(args: TrainArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let model_kind: String = args
        .model
        .clone()
        .or(cfg.get("model")?)
        .ok_or_else(|| Error::Usage("--model is required".into()))?;
    let params = build_params(&model_kind, &args.param)?;

    let ds = load_training(&args.data, &target)?;
    let (x, y) = ds.to_xy()?;
    let model = fit(&params, &x, &y, seed)?;
    let train_acc = accuracy(&y, &model.predict(&x)?)?;

    let mut rep = Report::new(&args.out)?;
    save_model_with_names(&model, Some(&ds.class_names()?), rep.path("model.json"))?;
    rep.note("model.json");
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "model": model_kind,
        "params": to_value(&params),
    });
    let report = envelope(
        seed,
        echo,
        json!({
            "model_id": model.model_id(),
            "n_rows": x.n_rows(),
            "n_features": x.n_cols(),
            "n_classes": model.n_classes(),
            "train_accuracy": train_acc,
        }),
    );
    rep.write_json("report.json", &report)?;
    rep.finish("train", started)
}

#[derive(Args)]
pub struct TuneArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Fixed hyperparameter override applied before the search; repeatable
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Search axis, e.g. `l2=0.0,0.01,0.1`; repeatable
    #[arg(long, value_name = "KEY=V1,V2,...")]
    axis: Vec<String>,
    /// grid tries every combination; random samples --n-iter of them
    #[arg(long, value_parser = ["grid", "random"])]
    mode: Option<String>,
    /// Number of random-mode samples
    #[arg(long, value_name = "N")]
    n_iter: Option<usize>,
    /// Cross-validation folds per trial
    #[arg(long, value_name = "K")]
    folds: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn tune(args: TuneArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let model_kind: String = args
        .model
        .clone()
        .or(cfg.get("model")?)
        .ok_or_else(|| Error::Usage("--model is required".into()))?;
    let base = build_params(&model_kind, &args.param)?;
    let mut axes = Vec::new();
    for a in &args.axis {
        axes.push(parse_axis(a)?);
    }
    if axes.is_empty() {
        if let Some(from_cfg) = cfg.get::<Vec<(String, Vec<f64>)>>("axes")? {
            axes = from_cfg;
        }
    }
    let mode_str: String = args.mode.clone().or(cfg.get("mode")?).unwrap_or("grid".into());
    let mode = match mode_str.as_str() {
        "grid" => SearchMode::Grid,
        "random" => SearchMode::Random {
            n_iter: args.n_iter.or(cfg.get("n_iter")?).unwrap_or(10),
        },
        other => return Err(Error::Usage(format!("unknown search mode `{other}`"))),
    };
    let folds = args.folds.or(cfg.get("folds")?).unwrap_or(5);

    let ds = load_training(&args.data, &target)?;
    let (x, y) = ds.to_xy()?;
    let spec = SearchSpec {
        base,
        axes: axes.clone(),
        mode,
        folds,
        seed,
    };
    let result = hyper_search(&spec, &x, &y)?;
    let best = fit(&result.best_params, &x, &y, seed)?;

    let mut rep = Report::new(&args.out)?;
    save_model_with_names(&best, Some(&ds.class_names()?), rep.path("best_model.json"))?;
    rep.note("best_model.json");
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "model": model_kind,
        "axes": axes,
        "mode": mode_str,
        "folds": folds,
    });
    let report = envelope(seed, echo, json!({ "search": to_value(&result) }));
    rep.write_json("search.json", &report)?;
    rep.finish("tune", started)
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Evaluation data (held-out test set, or the full set with --folds)
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Saved model to score
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    model_file: Option<PathBuf>,
    /// Model kind to cross-validate instead of scoring a saved model
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Cross-validation folds (only with --model)
    #[arg(long, value_name = "K")]
    folds: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn evaluate(args: EvaluateArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let ds = load_training(&args.data, &target)?;
    let (x, y) = ds.to_xy()?;
    let mut rep = Report::new(&args.out)?;

    if let Some(model_path) = &args.model_file {
        let (model, saved_names) = load_model_with_names(model_path)?;
        let data_names = ds.class_names()?;
        let y = align_labels(&y, &data_names, saved_names.as_deref())?;
        let names = saved_names.unwrap_or(data_names);
        let preds = model.predict(&x)?;
        let k = model.n_classes().max(names.len());
        let report = classification_report(&y, &preds, Some(names.as_slice()))?;
        let confusion = confusion_rows(&y, &preds, k)?;
        let auc = if model.n_classes() == 2 {
            Some(mannwhitney_auc(&y, &model.predict_proba(&x)?.col(1))?)
        } else {
            None
        };
        let echo = json!({
            "data": args.data.display().to_string(),
            "target": target,
            "model_file": model_path.display().to_string(),
        });
        let payload = envelope(
            seed,
            echo,
            json!({
                "model_id": model.model_id(),
                "n_rows": x.n_rows(),
                "classification": to_value(&report),
                "confusion_matrix": confusion,
                "roc_auc": auc,
            }),
        );
        rep.write_json("evaluation.json", &payload)?;
        let mut text = report.render_text();
        if let Some(a) = auc {
            text.push_str(&format!("\nROC AUC: {a:.6}\n"));
        }
        rep.write_text("report.txt", &text)?;
    } else {
        let model_kind: String = args
            .model
            .clone()
            .or(cfg.get("model")?)
            .ok_or_else(|| Error::Usage("pass --model-file or --model".into()))?;
        let params = build_params(&model_kind, &args.param)?;
        let folds = args.folds.or(cfg.get("folds")?).unwrap_or(5);
        let scores = cv_scores(&params, &x, &y, folds, seed)?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64;
        let echo = json!({
            "data": args.data.display().to_string(),
            "target": target,
            "model": model_kind,
            "params": to_value(&params),
            "folds": folds,
        });
        let payload = envelope(
            seed,
            echo,
            json!({
                "cv_scores": scores,
                "cv_mean": mean,
                "cv_std": var.sqrt(),
            }),
        );
        rep.write_json("evaluation.json", &payload)?;
        let mut text = format!("{folds}-fold cross-validation of {model_kind}\n");
        for (i, s) in scores.iter().enumerate() {
            text.push_str(&format!("fold {i}: {s:.4}\n"));
        }
        text.push_str(&format!("mean {mean:.4}  sd {:.4}\n", var.sqrt()));
        rep.write_text("report.txt", &text)?;
    }
    rep.finish("evaluate", started)
}

#[derive(Args)]
pub struct CurvesArgs {
    /// roc and pr need a binary target; learning refits at growing sizes
    #[arg(long, value_parser = ["roc", "pr", "learning"])]
    kind: String,
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    model_file: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Training fractions for --kind learning, e.g. `0.1,0.25,0.5,1.0`
    #[arg(long, value_name = "F1,F2,...")]
    fractions: Option<String>,
    /// Held-out fraction for --kind learning
    #[arg(long, value_name = "F")]
    test_fraction: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn curves(args: CurvesArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let ds = load_training(&args.data, &target)?;
    let (x, y) = ds.to_xy()?;

    // A saved model is scored as-is for roc/pr and refit from its own
    // hyperparameters for the learning curve.
    let params = if let Some(path) = &args.model_file {
        load_model(path)?.refit_params()
    } else {
        let model_kind: String = args
            .model
            .clone()
            .or(cfg.get("model")?)
            .ok_or_else(|| Error::Usage("pass --model-file or --model".into()))?;
        build_params(&model_kind, &args.param)?
    };

    let (curves, title, x_label, y_label): (Vec<CurveData>, &str, &str, &str) =
        match args.kind.as_str() {
            "roc" | "pr" => {
                let (model, y_eval) = match &args.model_file {
                    Some(path) => {
                        let (m, saved) = load_model_with_names(path)?;
                        let aligned = align_labels(&y, &ds.class_names()?, saved.as_deref())?;
                        (m, aligned)
                    }
                    None => (fit(&params, &x, &y, seed)?, y.clone()),
                };
                let scores = model.predict_proba(&x)?.col(1);
                if args.kind == "roc" {
                    (
                        vec![roc_curve(&y_eval, &scores)?],
                        "ROC curve",
                        "false positive rate",
                        "true positive rate",
                    )
                } else {
                    (
                        vec![pr_curve(&y_eval, &scores)?],
                        "Precision-recall curve",
                        "recall",
                        "precision",
                    )
                }
            }
            "learning" => {
                let fractions = match args.fractions.as_deref() {
                    Some(s) => parse_f64_list(s)?,
                    None => cfg
                        .get("fractions")?
                        .unwrap_or_else(|| vec![0.1, 0.25, 0.5, 0.75, 1.0]),
                };
                let test_fraction = args
                    .test_fraction
                    .or(cfg.get("test_fraction")?)
                    .unwrap_or(0.2);
                let (train_c, test_c) =
                    learning_curve(&params, &x, &y, &fractions, test_fraction, seed)?;
                (
                    vec![train_c, test_c],
                    "Learning curve",
                    "training fraction",
                    "accuracy",
                )
            }
            other => return Err(Error::Usage(format!("unknown curve kind `{other}`"))),
        };

    let mut rep = Report::new(&args.out)?;
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "kind": args.kind,
        "params": to_value(&params),
    });
    let payload = envelope(seed, echo, json!({ "curves": to_value(&curves) }));
    rep.write_json("curves.json", &payload)?;
    rep.write_text(
        "curves.svg",
        &render_curves_svg(&curves, title, x_label, y_label),
    )?;
    rep.finish("curves", started)
}

#[derive(Args)]
pub struct ExportArgs {
    /// Saved model to re-serialize
    #[arg(long, value_name = "FILE")]
    model_file: PathBuf,
    /// Destination file
    #[arg(long, value_name = "FILE")]
    out_file: PathBuf,
}

pub fn export(args: ExportArgs, _started: Instant) -> Result<()> {
    let (model, names) = load_model_with_names(&args.model_file)?;
    save_model_with_names(&model, names.as_deref(), &args.out_file)?;
    let summary = model_summary(&model);
    super::emit(
        &serde_json::to_string_pretty(&envelope(
            42,
            json!({
                "model_file": args.model_file.display().to_string(),
                "out_file": args.out_file.display().to_string(),
            }),
            summary,
        ))
        .expect("JSON"),
    );
    Ok(())
}

#[derive(Args)]
pub struct ImportArgs {
    /// Model file to validate and install
    #[arg(long, value_name = "FILE")]
    model_file: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn import(args: ImportArgs, started: Instant) -> Result<()> {
    let (model, names) = load_model_with_names(&args.model_file)?;
    let mut rep = Report::new(&args.out)?;
    save_model_with_names(&model, names.as_deref(), rep.path("model.json"))?;
    rep.note("model.json");
    let payload = envelope(
        42,
        json!({ "model_file": args.model_file.display().to_string() }),
        model_summary(&model),
    );
    rep.write_json("import.json", &payload)?;
    rep.finish("import", started)
}

fn model_summary(model: &ClassifierModel) -> serde_json::Value {
    json!({
        "model_id": model.model_id(),
        "n_features": model.n_features(),
        "n_classes": model.n_classes(),
        "params": to_value(&model.refit_params()),
    })
}
