//! `inspect`, `prep`, and `split`.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use super::{envelope, resolve_seed, resolve_target, to_value, FileCfg, Report};
use crate::data::{
    self, correlation_matrix, impute_missing, save_csv, standardize, summarize, train_test_split,
    ImputePolicy, SplitSpec,
};
use crate::error::{Error, Result};

#[derive(Args)]
pub struct InspectArgs {
    /// Input CSV
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Target column name
    #[arg(long)]
    target: Option<String>,
    /// Output directory; omit to print the report to stdout
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// JSON config file; flags take precedence over its keys
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn inspect(args: InspectArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = resolve_target(&args.target, &cfg)?;
    let ds = data::load_csv(&args.data, target.as_deref())?;

    let summary = summarize(&ds);
    let (corr_names, corr) = correlation_matrix(&ds)?;
    let corr_rows: Vec<Vec<f64>> = corr.rows_iter().map(<[f64]>::to_vec).collect();

    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
    });
    let report = envelope(
        seed,
        echo,
        json!({
            "summary": to_value(&summary),
            "correlation": {"columns": corr_names.clone(), "matrix": corr_rows},
        }),
    );

    let Some(out) = args.out else {
        super::emit(&serde_json::to_string_pretty(&report).expect("JSON"));
        return Ok(());
    };
    let mut rep = Report::new(&out)?;
    rep.write_json("inspect.json", &report)?;
    let mut csv = String::from("column");
    for n in &corr_names {
        csv.push(',');
        csv.push_str(n);
    }
    csv.push('\n');
    for (i, n) in corr_names.iter().enumerate() {
        csv.push_str(n);
        for v in corr.row(i) {
            csv.push_str(&format!(",{v:.6}"));
        }
        csv.push('\n');
    }
    rep.write_text("correlation.csv", &csv)?;
    rep.finish("inspect", started)
}

#[derive(Args)]
pub struct PrepArgs {
    /// Input CSV (never modified; the cleaned copy goes to --out)
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Fill policy for missing numeric/categorical cells
    #[arg(long, value_parser = ["mean", "median", "mode"])]
    impute: Option<String>,
    /// Center and scale numeric feature columns to mean 0, sd 1
    #[arg(long)]
    standardize: bool,
    /// Restrict standardization to these columns (comma-separated)
    #[arg(long, value_name = "COLS")]
    columns: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn prep(args: PrepArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = resolve_target(&args.target, &cfg)?;
    let impute: Option<String> = args.impute.clone().or(cfg.get("impute")?);
    let standardize_on = args.standardize || cfg.get("standardize")?.unwrap_or(false);
    let columns: Option<Vec<String>> = args
        .columns
        .as_deref()
        .map(super::parse_str_list)
        .or(cfg.get("columns")?);

    let mut ds = data::load_csv(&args.data, target.as_deref())?;
    let fills = match impute.as_deref() {
        None => Vec::new(),
        Some("mean") => impute_missing(&mut ds, ImputePolicy::Mean)?,
        Some("median") => impute_missing(&mut ds, ImputePolicy::Median)?,
        Some("mode") => impute_missing(&mut ds, ImputePolicy::Mode)?,
        Some(other) => return Err(Error::Usage(format!("unknown impute policy `{other}`"))),
    };
    let scaler = if standardize_on {
        Some(standardize(&mut ds, columns.as_deref())?)
    } else {
        None
    };

    let mut rep = Report::new(&args.out)?;
    save_csv(&ds, rep.path("data.csv"))?;
    rep.note("data.csv");
    if let Some(s) = &scaler {
        rep.write_json("scaler.json", &to_value(s))?;
    }
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "impute": impute,
        "standardize": standardize_on,
        "columns": columns,
    });
    let fills: Vec<_> = fills
        .into_iter()
        .map(|(name, v)| json!({"column": name, "fill": v}))
        .collect();
    let report = envelope(
        seed,
        echo,
        json!({
            "n_rows": ds.data.n_rows(),
            "n_cols": ds.data.n_cols(),
            "imputed": fills,
            "standardized_columns": scaler.as_ref().map(|s| s.columns.clone()),
        }),
    );
    rep.write_json("prep.json", &report)?;
    rep.finish("prep", started)
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Fraction of rows held out for the test side
    #[arg(long, value_name = "F")]
    test_fraction: Option<f64>,
    /// Preserve class proportions on both sides (requires --target)
    #[arg(long)]
    stratified: bool,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn split(args: SplitArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = resolve_target(&args.target, &cfg)?;
    let test_fraction = args
        .test_fraction
        .or(cfg.get("test_fraction")?)
        .unwrap_or(0.2);
    let stratified = args.stratified || cfg.get("stratified")?.unwrap_or(false);

    let ds = data::load_csv(&args.data, target.as_deref())?;
    let spec = SplitSpec {
        test_fraction,
        stratified,
        seed,
    };
    let (train, test) = train_test_split(&ds, &spec)?;

    let mut rep = Report::new(&args.out)?;
    save_csv(&train, rep.path("train.csv"))?;
    rep.note("train.csv");
    save_csv(&test, rep.path("test.csv"))?;
    rep.note("test.csv");

    let class_counts = |side: &crate::data::Dataset| -> Result<Option<serde_json::Value>> {
        if side.target.is_none() {
            return Ok(None);
        }
        let y = side.labels()?;
        let names = side.class_names()?;
        let mut counts = vec![0usize; names.len()];
        for &c in &y {
            counts[c] += 1;
        }
        let map: serde_json::Map<String, serde_json::Value> = names
            .into_iter()
            .zip(counts)
            .map(|(n, c)| (n, json!(c)))
            .collect();
        Ok(Some(serde_json::Value::Object(map)))
    };

    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "test_fraction": test_fraction,
        "stratified": stratified,
    });
    let report = envelope(
        seed,
        echo,
        json!({
            "n_train": train.data.n_rows(),
            "n_test": test.data.n_rows(),
            "train_class_counts": class_counts(&train)?,
            "test_class_counts": class_counts(&test)?,
        }),
    );
    rep.write_json("split.json", &report)?;
    rep.finish("split", started)
}
