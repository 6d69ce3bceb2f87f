//! `gan-augment`, `make-regression`, `llm-generate`, `llm-chat`, `syn-eval`.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use super::{envelope, parse_str_list, resolve_seed, resolve_target, to_value, FileCfg, Report};
use crate::data::{self, save_csv, ColumnKind, ColumnMeta, Dataset};
use crate::error::{Error, Result};
use crate::llmgen::{
    build_prompt, chat_loop, get_completion, parse_table, ChatTransport, GenSpec, HttpTransport,
    LlmConfig, MockOutcome, MockTransport, Transcript,
};
use crate::models::ForestParams;
use crate::numkit::Matrix;
use crate::syneval::{fidelity_report, DEFAULT_ALPHA};
use crate::tabgan::{generate_data_pipe, GanPipeConfig};

fn require_target(target: Option<String>) -> Result<String> {
    target.ok_or_else(|| Error::Usage("--target is required for this command".into()))
}

#[derive(Args)]
pub struct GanAugmentArgs {
    /// Training CSV; all feature columns must be numeric
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Held-out CSV used to score synthetic rows for realism
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,
    /// Epochs without generator-loss improvement before training stops
    #[arg(long, value_name = "N")]
    patience: Option<usize>,
    /// Synthetic rows requested, as a multiple of the training row count
    #[arg(long, value_name = "N")]
    gen_x_times: Option<usize>,
    /// Lower per-feature quantile kept by the post-filter
    #[arg(long, value_name = "Q")]
    bot: Option<f64>,
    /// Upper per-feature quantile kept by the post-filter
    #[arg(long, value_name = "Q")]
    top: Option<f64>,
    /// Oversampling multiplier applied before filtering
    #[arg(long, value_name = "F")]
    pregeneration_frac: Option<f64>,
    /// Emit only synthetic rows (skip combined.csv)
    #[arg(long)]
    only_generated: bool,
    /// Skip quantile filtering and value clipping
    #[arg(long)]
    no_post_process: bool,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Features-then-target dataset sharing the template's column metadata.
fn dataset_from_xy(template: &Dataset, x: &Matrix, y: &[usize]) -> Result<Dataset> {
    let t = template.target.ok_or(Error::MissingTarget)?;
    let mut columns: Vec<ColumnMeta> = template
        .columns
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != t)
        .map(|(_, c)| c.clone())
        .collect();
    columns.push(template.columns[t].clone());
    let d = columns.len() - 1;
    let mut out = Matrix::zeros(x.n_rows(), d + 1);
    for i in 0..x.n_rows() {
        for j in 0..d {
            out.set(i, j, x.get(i, j));
        }
        out.set(i, d, y[i] as f64);
    }
    Ok(Dataset {
        columns,
        data: out,
        target: Some(d),
    })
}

pub fn gan_augment(args: GanAugmentArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;

    let mut pipe: GanPipeConfig = cfg.get("gan")?.unwrap_or_default();
    if let Some(v) = args.epochs {
        pipe.gan_params.epochs = v;
    }
    if let Some(v) = args.batch_size {
        pipe.gan_params.batch_size = v;
    }
    if let Some(v) = args.patience {
        pipe.gan_params.patience = v;
    }
    if let Some(v) = args.gen_x_times {
        pipe.gen_x_times = v;
    }
    if let Some(v) = args.bot {
        pipe.bot_filter_quantile = v;
    }
    if let Some(v) = args.top {
        pipe.top_filter_quantile = v;
    }
    if let Some(v) = args.pregeneration_frac {
        pipe.pregeneration_frac = v;
    }
    if args.only_generated {
        pipe.only_generated_data = true;
    }
    if args.no_post_process {
        pipe.is_post_process = false;
    }

    let ds = data::load_csv(&args.data, Some(&target))?;
    // Label-encoded categorical features must be declared so the pipeline
    // can refuse them; after to_xy their codes look like ordinary numbers.
    if pipe.cat_cols.is_none() {
        let cats: Vec<String> = ds
            .columns
            .iter()
            .enumerate()
            .filter(|(j, c)| {
                Some(*j) != ds.target && matches!(c.kind, ColumnKind::Categorical { .. })
            })
            .map(|(_, c)| c.name.clone())
            .collect();
        if !cats.is_empty() {
            pipe.cat_cols = Some(cats);
        }
    }
    let (x, y) = ds.to_xy()?;
    let test_x = match &args.test {
        Some(path) => Some(data::load_csv(path, Some(&target))?.features()),
        None => None,
    };

    let out = generate_data_pipe(&x, &y, test_x.as_ref(), &pipe, seed)?;
    let synthetic = dataset_from_xy(&ds, &out.gen_x, &out.gen_y)?;

    let mut rep = Report::new(&args.out)?;
    save_csv(&synthetic, rep.path("synthetic.csv"))?;
    rep.note("synthetic.csv");
    if !pipe.only_generated_data {
        let mut combined = dataset_from_xy(&ds, &x, &y)?;
        combined.data = combined.data.vstack(&synthetic.data)?;
        save_csv(&combined, rep.path("combined.csv"))?;
        rep.note("combined.csv");
    }
    let echo = json!({
        "data": args.data.display().to_string(),
        "target": target,
        "test": args.test.as_ref().map(|p| p.display().to_string()),
        "gan": to_value(&pipe),
    });
    let payload = envelope(
        seed,
        echo,
        json!({
            "report": to_value(&out.report),
            "n_synthetic": out.gen_x.n_rows(),
            "n_real": x.n_rows(),
        }),
    );
    rep.write_json("gan_report.json", &payload)?;
    rep.finish("gan-augment", started)
}

#[derive(Args)]
pub struct MakeRegressionArgs {
    #[arg(long, value_name = "N")]
    rows: Option<usize>,
    #[arg(long, value_name = "N")]
    features: Option<usize>,
    /// Features with nonzero ground-truth weight
    #[arg(long, value_name = "N")]
    informative: Option<usize>,
    /// Standard deviation of the additive noise
    #[arg(long, value_name = "SD")]
    noise: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn make_regression(args: MakeRegressionArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let rows = args.rows.or(cfg.get("rows")?).unwrap_or(100);
    let features = args.features.or(cfg.get("features")?).unwrap_or(10);
    let informative = args.informative.or(cfg.get("informative")?).unwrap_or(5);
    let noise = args.noise.or(cfg.get("noise")?).unwrap_or(0.0);

    let reg = crate::tabgan::make_regression(rows, features, informative, noise, seed)?;

    // Per-feature least-squares lines against the target, for quick plots.
    let x = reg.dataset.features();
    let t = reg.dataset.target.expect("make_regression sets a target");
    let yv = reg.dataset.data.col(t);
    let n = rows as f64;
    let y_mean = yv.iter().sum::<f64>() / n;
    let fits: Vec<serde_json::Value> = (0..x.n_cols())
        .map(|j| {
            let col = x.col(j);
            let x_mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - x_mean).powi(2)).sum::<f64>();
            let cov = col
                .iter()
                .zip(&yv)
                .map(|(a, b)| (a - x_mean) * (b - y_mean))
                .sum::<f64>();
            let slope = if var > 0.0 { cov / var } else { 0.0 };
            json!({
                "feature": reg.dataset.columns[j].name,
                "slope": slope,
                "intercept": y_mean - slope * x_mean,
            })
        })
        .collect();

    let mut rep = Report::new(&args.out)?;
    save_csv(&reg.dataset, rep.path("regression.csv"))?;
    rep.note("regression.csv");
    let echo = json!({
        "rows": rows,
        "features": features,
        "informative": informative,
        "noise": noise,
    });
    let payload = envelope(
        seed,
        echo,
        json!({
            "coefficients": reg.coefficients,
            "informative": reg.informative,
            "univariate_fits": fits,
        }),
    );
    rep.write_json("regression.json", &payload)?;
    rep.finish("make-regression", started)
}

#[derive(Args)]
pub struct LlmGenerateArgs {
    /// Subject of the requested table, e.g. "CO2 emissions by country"
    #[arg(long)]
    topic: String,
    #[arg(long, value_name = "N")]
    rows: usize,
    #[arg(long, value_name = "N")]
    cols: usize,
    /// Column descriptions forwarded to the model (comma-separated)
    #[arg(long, value_name = "H1,H2,...")]
    hints: Option<String>,
    /// File whose contents stand in for the model reply (offline mode)
    #[arg(long, value_name = "FILE")]
    mock_reply: Option<PathBuf>,
    /// Chat-completions URL; required unless --mock-reply is given
    #[arg(long)]
    endpoint: Option<String>,
    /// Environment variable holding the API key
    #[arg(long, value_name = "NAME")]
    api_key_env: Option<String>,
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long, value_name = "T")]
    temperature: Option<f64>,
    #[arg(long, value_name = "SECS")]
    timeout_secs: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn llm_settings(
    cfg: &FileCfg,
    endpoint: &Option<String>,
    api_key_env: &Option<String>,
    model_id: &Option<String>,
    timeout_secs: &Option<u64>,
) -> Result<LlmConfig> {
    let mut llm: LlmConfig = cfg.get("llm")?.unwrap_or_default();
    if let Some(v) = endpoint {
        llm.endpoint = v.clone();
    }
    if let Some(v) = api_key_env {
        llm.api_key_env = v.clone();
    }
    if let Some(v) = model_id {
        llm.model_id = v.clone();
    }
    if let Some(v) = timeout_secs {
        llm.timeout_secs = *v;
    }
    Ok(llm)
}

fn read_file(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn llm_generate(args: LlmGenerateArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let llm = llm_settings(
        &cfg,
        &args.endpoint,
        &args.api_key_env,
        &args.model_id,
        &args.timeout_secs,
    )?;
    let mut spec = GenSpec::new(args.topic.clone(), args.rows, args.cols);
    spec.column_hints = args
        .hints
        .as_deref()
        .map(parse_str_list)
        .or(cfg.get("hints")?);
    spec.model_id = llm.model_id.clone();
    spec.temperature = args.temperature.or(cfg.get("temperature")?).unwrap_or(0.0);
    spec.validate()?;

    let mut mock;
    let mut http;
    let transport: &mut dyn ChatTransport = match &args.mock_reply {
        Some(path) => {
            mock = MockTransport::replying(&read_file(path)?);
            &mut mock
        }
        None => {
            http = HttpTransport::new(llm)?;
            &mut http
        }
    };

    // The steps are run separately so the transcript lands on disk even when
    // the reply fails to parse; failed runs stay auditable.
    let prompt = build_prompt(&spec);
    let raw_reply = get_completion(&prompt, &spec.model_id, spec.temperature, transport)?;
    let mut rep = Report::new(&args.out)?;
    let echo = json!({
        "topic": args.topic,
        "rows": args.rows,
        "cols": args.cols,
        "mock_reply": args.mock_reply.as_ref().map(|p| p.display().to_string()),
        "model_id": spec.model_id,
        "temperature": spec.temperature,
    });
    let write_transcript = |rep: &mut Report, status: String| -> Result<()> {
        let transcript = Transcript {
            spec: spec.clone(),
            prompt: prompt.clone(),
            raw_reply: raw_reply.clone(),
            parse_status: status,
        };
        let payload = envelope(seed, echo.clone(), json!({ "transcript": to_value(&transcript) }));
        rep.write_json("transcript.json", &payload)
    };

    let dataset = match parse_table(&raw_reply) {
        Ok(ds) => ds,
        Err(e) => {
            let reason = e.to_string();
            write_transcript(&mut rep, reason.clone())?;
            return Err(Error::ParseFailure {
                reason,
                raw: raw_reply.clone(),
            });
        }
    };
    let (got_rows, got_cols) = (dataset.data.n_rows(), dataset.data.n_cols());
    if got_rows != spec.n_rows || got_cols != spec.n_cols {
        let e = Error::TableCountMismatch {
            rows: got_rows,
            cols: got_cols,
            want_rows: spec.n_rows,
            want_cols: spec.n_cols,
        };
        write_transcript(&mut rep, e.to_string())?;
        return Err(e);
    }

    write_transcript(&mut rep, "ok".to_string())?;
    save_csv(&dataset, rep.path("dataset.csv"))?;
    rep.note("dataset.csv");
    rep.finish("llm-generate", started)
}

#[derive(Args)]
pub struct LlmChatArgs {
    /// File of canned replies separated by lines containing only `---`
    #[arg(long, value_name = "FILE")]
    mock_replies: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, value_name = "NAME")]
    api_key_env: Option<String>,
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long, value_name = "T")]
    temperature: Option<f64>,
    #[arg(long, value_name = "SECS")]
    timeout_secs: Option<u64>,
    /// System prompt prepended to the history
    #[arg(long)]
    system: Option<String>,
    /// Write the full message history here as JSON when the session ends
    #[arg(long, value_name = "FILE")]
    transcript: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn llm_chat(args: LlmChatArgs, _started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let llm = llm_settings(
        &cfg,
        &args.endpoint,
        &args.api_key_env,
        &args.model_id,
        &args.timeout_secs,
    )?;
    let temperature = args.temperature.or(cfg.get("temperature")?).unwrap_or(0.0);
    let system = args.system.clone().or(cfg.get("system")?);
    let model_id = llm.model_id.clone();

    let mut mock;
    let mut http;
    let transport: &mut dyn ChatTransport = match &args.mock_replies {
        Some(path) => {
            let text = read_file(path)?;
            let replies: Vec<MockOutcome> = text
                .split('\n')
                .collect::<Vec<_>>()
                .split(|line| line.trim() == "---")
                .map(|chunk| MockOutcome::Content(chunk.join("\n").trim().to_string()))
                .collect();
            mock = MockTransport::scripted(replies);
            &mut mock
        }
        None => {
            http = HttpTransport::new(llm)?;
            &mut http
        }
    };

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let history = chat_loop(
        stdin.lock(),
        stdout.lock(),
        system.as_deref(),
        &model_id,
        temperature,
        transport,
    )?;

    if let Some(path) = &args.transcript {
        let echo = json!({
            "model_id": model_id,
            "temperature": temperature,
            "system": system,
        });
        let payload = envelope(seed, echo, json!({ "messages": to_value(&history) }));
        let text = serde_json::to_string_pretty(&payload).expect("JSON") + "\n";
        fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    Ok(())
}

#[derive(Args)]
pub struct SynEvalArgs {
    /// Reference data the synthetic rows are judged against
    #[arg(long, value_name = "FILE")]
    real: PathBuf,
    /// Candidate synthetic data; must share the real data's columns
    #[arg(long, value_name = "FILE")]
    synth: PathBuf,
    #[arg(long)]
    target: Option<String>,
    /// Per-feature test significance level
    #[arg(long, value_name = "A")]
    alpha: Option<f64>,
    /// Trees in the importance-ranking forest
    #[arg(long, value_name = "N")]
    trees: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn syn_eval(args: SynEvalArgs, started: Instant) -> Result<()> {
    let cfg = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let target = require_target(resolve_target(&args.target, &cfg)?)?;
    let alpha = args.alpha.or(cfg.get("alpha")?).unwrap_or(DEFAULT_ALPHA);
    let trees = args.trees.or(cfg.get("trees")?).unwrap_or(50);

    let real = data::load_csv(&args.real, Some(&target))?;
    let synth = data::load_csv(&args.synth, Some(&target))?;
    let rf = ForestParams {
        n_trees: trees,
        max_depth: Some(10),
        min_samples_split: 2,
        max_features: None,
    };
    let report = fidelity_report(&real, &synth, alpha, &rf, seed)?;

    let mut rep = Report::new(&args.out)?;
    let echo = json!({
        "real": args.real.display().to_string(),
        "synth": args.synth.display().to_string(),
        "target": target,
        "alpha": alpha,
        "trees": trees,
    });
    let payload = envelope(seed, echo, json!({ "fidelity": to_value(&report) }));
    rep.write_json("fidelity.json", &payload)?;
    rep.write_text("fidelity.csv", &report.render_csv())?;
    rep.write_text(
        "importance.csv",
        &report.importance_csv(&real.feature_names()),
    )?;
    rep.finish("syn-eval", started)
}
