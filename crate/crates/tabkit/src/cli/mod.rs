//! Command-line front end.
//!
//! Subcommands read their inputs, write artifacts under `--out`, and never
//! mutate an input file. JSON reports carry `tool_version`, `format_version`,
//! `seed`, and a `config_echo` of the effective settings; keys are sorted, so
//! a rerun with the same inputs and seed is byte-identical. Wall-clock detail
//! goes to the separate `run_meta.json`. Failures print one machine-readable
//! JSON object to stderr and exit with the error's code (usage 2, data 3,
//! model 4, transport 5).

mod data_cmds;
mod explain_cmds;
mod model_cmds;
mod synth_cmds;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::models::ModelParams;

pub(crate) const FORMAT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "tabkit",
    version,
    about = "Tabular ML toolkit: train, explain, synthesize, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a CSV: per-column stats, missing counts, correlations
    Inspect(data_cmds::InspectArgs),
    /// Impute missing values and optionally standardize columns
    Prep(data_cmds::PrepArgs),
    /// Split a dataset into train and test CSVs
    Split(data_cmds::SplitArgs),
    /// Fit a classifier and save it as JSON
    Train(model_cmds::TrainArgs),
    /// Cross-validated hyperparameter search
    Tune(model_cmds::TuneArgs),
    /// Score a model on a dataset, or cross-validate a model kind
    Evaluate(model_cmds::EvaluateArgs),
    /// ROC, precision-recall, or learning curves with an SVG plot
    Curves(model_cmds::CurvesArgs),
    /// Explain one instance with combined drop-column + permutation scores
    Interpret(explain_cmds::InterpretArgs),
    /// Run several explainers on one instance and tabulate their scores
    CompareExplainers(explain_cmds::CompareArgs),
    /// Score explainers against synthetic ground-truth datasets
    XaiBench(explain_cmds::XaiBenchArgs),
    /// Train a tabular GAN and emit filtered synthetic rows
    GanAugment(synth_cmds::GanAugmentArgs),
    /// Generate a linear regression dataset with known coefficients
    MakeRegression(synth_cmds::MakeRegressionArgs),
    /// Ask a chat model for a table and parse it into a dataset
    LlmGenerate(synth_cmds::LlmGenerateArgs),
    /// Interactive chat session over stdin/stdout
    LlmChat(synth_cmds::LlmChatArgs),
    /// Statistical fidelity report: synthetic vs real data
    SynEval(synth_cmds::SynEvalArgs),
    /// Re-serialize a saved model to a new file
    Export(model_cmds::ExportArgs),
    /// Validate a model file and install it into an output directory
    Import(model_cmds::ImportArgs),
}

/// Entry point for the `tabkit` binary. Returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; only real mistakes are errors.
            if e.use_stderr() {
                report_error(&Error::Usage(e.to_string()));
                return 2;
            }
            let _ = e.print();
            return 0;
        }
    };
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Inspect(a) => data_cmds::inspect(a, started),
        Command::Prep(a) => data_cmds::prep(a, started),
        Command::Split(a) => data_cmds::split(a, started),
        Command::Train(a) => model_cmds::train(a, started),
        Command::Tune(a) => model_cmds::tune(a, started),
        Command::Evaluate(a) => model_cmds::evaluate(a, started),
        Command::Curves(a) => model_cmds::curves(a, started),
        Command::Interpret(a) => explain_cmds::interpret(a, started),
        Command::CompareExplainers(a) => explain_cmds::compare(a, started),
        Command::XaiBench(a) => explain_cmds::xai_bench(a, started),
        Command::GanAugment(a) => synth_cmds::gan_augment(a, started),
        Command::MakeRegression(a) => synth_cmds::make_regression(a, started),
        Command::LlmGenerate(a) => synth_cmds::llm_generate(a, started),
        Command::LlmChat(a) => synth_cmds::llm_chat(a, started),
        Command::SynEval(a) => synth_cmds::syn_eval(a, started),
        Command::Export(a) => model_cmds::export(a, started),
        Command::Import(a) => model_cmds::import(a, started),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            e.kind().exit_code()
        }
    }
}

fn report_error(e: &Error) {
    let payload = json!({"error": {"kind": e.kind().as_str(), "message": e.to_string()}});
    eprintln!("{payload}");
}

/// Print to stdout, shrugging off a closed pipe (`tabkit ... | head`).
pub(crate) fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

// ---------------------------------------------------------------------------
// Config file overlay

/// Optional JSON config file. Command-line flags always win; call sites merge
/// with `flag.or(cfg.get("key")?).unwrap_or(default)`.
pub(crate) struct FileCfg(Value);

impl FileCfg {
    pub fn load(path: Option<&Path>) -> Result<FileCfg> {
        let Some(p) = path else {
            return Ok(FileCfg(json!({})));
        };
        let text = fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Usage(format!("config file {}: {e}", p.display())))?;
        if !v.is_object() {
            return Err(Error::Usage(format!(
                "config file {}: top level must be a JSON object",
                p.display()
            )));
        }
        Ok(FileCfg(v))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Usage(format!("config key `{key}`: {e}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Output directory

/// Collects artifacts for one run, then stamps `run_meta.json` and announces
/// what was written. Artifact files themselves contain nothing nondeterministic.
pub(crate) struct Report {
    dir: PathBuf,
    written: Vec<String>,
}

impl Report {
    pub fn new(dir: &Path) -> Result<Report> {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        Ok(Report {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Record a file written directly (e.g. via `save_csv`/`save_model`).
    pub fn note(&mut self, name: &str) {
        self.written.push(name.to_string());
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("JSON value serializes") + "\n";
        self.write_text(name, &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        self.note(name);
        Ok(())
    }

    pub fn finish(self, subcommand: &str, started: Instant) -> Result<()> {
        let meta = json!({
            "subcommand": subcommand,
            "elapsed_ms": started.elapsed().as_millis() as u64,
            "completed_unix_s": SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        });
        let p = self.path("run_meta.json");
        let text = serde_json::to_string_pretty(&meta).expect("JSON value serializes") + "\n";
        fs::write(&p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        for name in &self.written {
            emit(&format!("wrote {}", self.path(name).display()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Shared report plumbing

/// Standard report wrapper: tool/format versions, seed, effective config,
/// then the payload's own fields. serde_json keeps keys sorted, which makes
/// the serialized form stable across reruns.
pub(crate) fn envelope(seed: u64, config_echo: Value, payload: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("format_version".into(), json!(FORMAT_VERSION));
    map.insert("seed".into(), json!(seed));
    map.insert("config_echo".into(), config_echo);
    if let Value::Object(extra) = payload {
        for (k, v) in extra {
            map.insert(k, v);
        }
    }
    Value::Object(map)
}

pub(crate) fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report type serializes")
}

// ---------------------------------------------------------------------------
// Flag parsing helpers

pub(crate) fn parse_kv(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected key=value, got `{s}`")))?;
    let val: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("`{}` is not a number in `{s}`", v.trim())))?;
    Ok((k.trim().to_string(), val))
}

pub(crate) fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Usage(format!("`{t}` is not a number")))
        })
        .collect()
}

pub(crate) fn parse_axis(s: &str) -> Result<(String, Vec<f64>)> {
    let (k, vs) = s
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected key=v1,v2,..., got `{s}`")))?;
    let values = parse_f64_list(vs)?;
    if values.is_empty() {
        return Err(Error::Usage(format!("axis `{s}` lists no values")));
    }
    Ok((k.trim().to_string(), values))
}

pub(crate) fn parse_str_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Model kind + repeated `--param key=value` overrides.
pub(crate) fn build_params(model: &str, params: &[String]) -> Result<ModelParams> {
    let mut p = ModelParams::default_for(model)?;
    for kv in params {
        let (k, v) = parse_kv(kv)?;
        p = p.with_param(&k, v)?;
    }
    Ok(p)
}

/// Seed precedence: flag, then config file, then 42.
pub(crate) fn resolve_seed(flag: Option<u64>, cfg: &FileCfg) -> Result<u64> {
    Ok(flag.or(cfg.get("seed")?).unwrap_or(42))
}

/// Target column precedence: flag, then config file.
pub(crate) fn resolve_target(flag: &Option<String>, cfg: &FileCfg) -> Result<Option<String>> {
    Ok(flag.clone().or(cfg.get("target")?))
}
