//! `interpret`, `compare-explainers`, `xai-bench`.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use super::{build_params, envelope, parse_str_list, resolve_seed, resolve_target, to_value, FileCfg, Report};
use crate::data;
use crate::error::{Error, Result};
use crate::explain::{
    drop_column_importances, greedy_explain, local_linear_explain, medley_interpret,
    parzen_explain, permutation_importances, xai_benchmark, BenchmarkConfig, LocalLinearConfig,
    EXPLAINER_IDS,
};
use crate::explain::surrogate::greedy_scores;
use crate::models::{fit, load_model, ModelParams};
use crate::numkit::Matrix;

fn require_target(target: Option<String>) -> Result<String> {
    target.ok_or_else(|| Error::Usage("--target is required for this command".into()))
}

/// Feature row of the dataset, bounds-checked.
fn instance_at(x: &Matrix, row: usize) -> Result<Vec<f64>> {
    if row >= x.n_rows() {
        return Err(Error::Usage(format!(
            "--row {row} is out of range for {} rows",
            x.n_rows()
        )));
    }
    Ok(x.row(row).to_vec())
}

#[derive(Args)]
pub struct InterpretArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Model kind to fit on the data
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Saved model whose hyperparameters drive the refits
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    model_file: Option<PathBuf>,
    /// Row index of the instance to explain
    #[arg(long, value_name = "N")]
    row: usize,
    /// Permutation repeats per feature
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn resolve_params(
    model: &Option<String>,
    param: &[String],
    model_file: &Option<PathBuf>,
    cfg: &FileCfg,
) -> Result<ModelParams> {
    if let Some(path) = model_file {
        return Ok(load_model(path)?.refit_params());
    }
    let model_kind: String = model
        .clone()
        .or(cfg.get("model")?)
        .ok_or_else(|| Error::Usage("pass --model or --model-file".into()))?;
    build_params(&model_kind, param)
}

pub fn interpret(args: InterpretArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let repeats = args.repeats.or(cfg.get("repeats")?).unwrap_or(5);
    let params = resolve_params(&args.model, &args.param, &args.model_file, &cfg)?;

    let ds = data::load_csv(&args.data, Some(&target))?;
    let instance = instance_at(&ds.features(), args.row)?;
    let explanation = medley_interpret(&params, &ds, &instance, repeats, seed)?;

    let mut rep = Report::new(&args.out)?;
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "row": args.row,
        "repeats": repeats,
        "params": to_value(&params),
    });
    let payload = envelope(seed, echo, json!({ "explanation": to_value(&explanation) }));
    rep.write_json("explanation.json", &payload)?;
    rep.write_text("explanation.csv", &explanation.render_csv())?;
    rep.finish("interpret", started)
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    model_file: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    row: usize,
    /// Subset of: medley, drop, perm, local_linear, greedy, parzen
    #[arg(long, value_name = "M1,M2,...")]
    methods: Option<String>,
    /// Permutation repeats (medley, perm)
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    /// Parzen kernel bandwidth
    #[arg(long, value_name = "W")]
    bandwidth: Option<f64>,
    /// Perturbation count for the local linear surrogate
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn compare(args: CompareArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let repeats = args.repeats.or(cfg.get("repeats")?).unwrap_or(5);
    let bandwidth = args.bandwidth.or(cfg.get("bandwidth")?).unwrap_or(1.0);
    let samples = args.samples.or(cfg.get("samples")?).unwrap_or(1000);
    let methods: Vec<String> = args
        .methods
        .as_deref()
        .map(parse_str_list)
        .or(cfg.get("methods")?)
        .unwrap_or_else(|| EXPLAINER_IDS.iter().map(|s| s.to_string()).collect());
    let params = resolve_params(&args.model, &args.param, &args.model_file, &cfg)?;

    let ds = data::load_csv(&args.data, Some(&target))?;
    let x = ds.features();
    let instance = instance_at(&x, args.row)?;
    let d = x.n_cols();
    let model = fit(&params, &x, &ds.labels()?, seed)?;

    let names = ds.feature_names();
    let mut per_method = serde_json::Map::new();
    let mut table: Vec<(String, Vec<f64>)> = Vec::new();
    for m in &methods {
        let scores: Vec<f64> = match m.as_str() {
            "medley" => medley_interpret(&params, &ds, &instance, repeats, seed)?
                .per_feature
                .iter()
                .map(|f| f.combined)
                .collect(),
            "drop" => drop_column_importances(&params, &ds, &ds, seed)?.1,
            "perm" => permutation_importances(&model, &ds, repeats, seed)?,
            "local_linear" => {
                let stds = column_stds(&x);
                let lcfg = LocalLinearConfig {
                    n_samples: samples,
                    seed,
                    ..LocalLinearConfig::default()
                };
                local_linear_explain(&model, &instance, &stds, &lcfg)?
            }
            "greedy" => greedy_scores(&greedy_explain(&model, &instance, d)?, d),
            "parzen" => parzen_explain(&model, &x, &instance, bandwidth)?.1,
            other => {
                return Err(Error::Usage(format!(
                    "unknown explainer `{other}`; choose from {}",
                    EXPLAINER_IDS.join(", ")
                )))
            }
        };
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let ranking: Vec<String> = order.iter().map(|&j| names[j].clone()).collect();
        per_method.insert(m.clone(), json!({"scores": scores.clone(), "ranking": ranking}));
        table.push((m.clone(), scores));
    }

    let mut rep = Report::new(&args.out)?;
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "row": args.row,
        "methods": methods,
        "repeats": repeats,
        "bandwidth": bandwidth,
        "samples": samples,
        "params": to_value(&params),
    });
    let payload = envelope(
        seed,
        echo,
        json!({
            "features": ds.feature_names(),
            "methods": serde_json::Value::Object(per_method),
        }),
    );
    rep.write_json("comparison.json", &payload)?;

    let mut csv = String::from("feature");
    for (m, _) in &table {
        csv.push(',');
        csv.push_str(m);
    }
    csv.push('\n');
    for (j, name) in names.iter().enumerate() {
        csv.push_str(name);
        for (_, scores) in &table {
            csv.push_str(&format!(",{:.6}", scores[j]));
        }
        csv.push('\n');
    }
    rep.write_text("comparison.csv", &csv)?;
    rep.finish("compare-explainers", started)
}

/// Population standard deviation per column.
fn column_stds(x: &Matrix) -> Vec<f64> {
    let n = x.n_rows() as f64;
    (0..x.n_cols())
        .map(|j| {
            let col = x.col(j);
            let mean = col.iter().sum::<f64>() / n;
            (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

#[derive(Args)]
pub struct XaiBenchArgs {
    /// Number of synthetic datasets in the suite
    #[arg(long, value_name = "N")]
    suite_size: Option<usize>,
    #[arg(long, value_name = "N")]
    rows: Option<usize>,
    #[arg(long, value_name = "N")]
    features: Option<usize>,
    /// Ground-truth informative features per dataset
    #[arg(long, value_name = "N")]
    gold: Option<usize>,
    /// Explained instances per dataset
    #[arg(long, value_name = "N")]
    instances: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_name = "KEY=VALUE")]
    param: Vec<String>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn xai_bench(args: XaiBenchArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let defaults = BenchmarkConfig::default();
    let model_kind: String = args
        .model
        .clone()
        .or(cfg.get("model")?)
        .unwrap_or_else(|| defaults.model.model_id().to_string());
    let bench = BenchmarkConfig {
        suite_size: args.suite_size.or(cfg.get("suite_size")?).unwrap_or(defaults.suite_size),
        rows_per_dataset: args.rows.or(cfg.get("rows")?).unwrap_or(defaults.rows_per_dataset),
        n_features: args.features.or(cfg.get("features")?).unwrap_or(defaults.n_features),
        n_gold: args.gold.or(cfg.get("gold")?).unwrap_or(defaults.n_gold),
        n_instances: args.instances.or(cfg.get("instances")?).unwrap_or(defaults.n_instances),
        model: build_params(&model_kind, &args.param)?,
        seed,
    };
    let result = xai_benchmark(&bench)?;

    let mut rep = Report::new(&args.out)?;
    let payload = envelope(
        seed,
        json!({ "config": to_value(&bench) }),
        json!({ "benchmark": to_value(&result) }),
    );
    rep.write_json("benchmark.json", &payload)?;
    rep.write_text("benchmark.txt", &result.render_text())?;
    rep.finish("xai-bench", started)
}
