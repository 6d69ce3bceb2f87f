//! LLM-backed tabular data generation: prompt construction, a
//! chat-completions client over a pluggable transport, and parsing of table
//! replies into [`Dataset`]s.
//!
//! The transport is injected so everything here is testable offline; see
//! [`MockTransport`]. Real calls go through [`HttpTransport`], configured
//! with an endpoint URL and the *name* of the environment variable holding
//! the API key — neither is ever hardcoded.

pub mod samples;

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::data::{from_string_table, ColumnKind, Dataset};
use crate::error::{Error, Result};

pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

/// Attempts per completion call; sleeps 100ms, then 200ms, between them.
const MAX_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 100;

fn default_model() -> String {
    DEFAULT_MODEL.to_string()
}

/// What to ask the model for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub topic: String,
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(default)]
    pub column_hints: Option<Vec<String>>,
    #[serde(default = "default_model")]
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
}

impl GenSpec {
    pub fn new(topic: impl Into<String>, n_rows: usize, n_cols: usize) -> Self {
        GenSpec {
            topic: topic.into(),
            n_rows,
            n_cols,
            column_hints: None,
            model_id: default_model(),
            temperature: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::Usage(format!(
                "generation spec needs at least 1 row and 1 column, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::Usage(format!(
                "temperature must be a finite non-negative number, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

/// Wire format of one chat-completions request body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

/// One POST of a chat request, returning the raw response body.
///
/// Implementations map network failure to [`Error::TransportFailure`] and
/// non-2xx statuses to [`Error::TransportStatus`]; body parsing happens in
/// the caller so it is covered by the same retry policy.
pub trait ChatTransport {
    fn send(&mut self, request: &ChatRequest) -> Result<String>;
}

fn extract_content(body: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Error::MalformedResponse(format!("not JSON: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| {
            Error::MalformedResponse("missing choices[0].message.content".to_string())
        })
}

/// Send caller-supplied history and return the assistant's reply text.
///
/// Transport failures, bad statuses, and malformed bodies are each retried
/// up to three attempts with exponential backoff before surfacing.
pub fn get_completion_from_messages(
    messages: &[ChatMessage],
    model_id: &str,
    temperature: f64,
    transport: &mut dyn ChatTransport,
) -> Result<String> {
    if messages.is_empty() {
        return Err(Error::EmptyMessages);
    }
    let request = ChatRequest {
        model: model_id.to_string(),
        messages: messages.to_vec(),
        temperature,
    };
    let mut last_err = None;
    for attempt in 0..MAX_ATTEMPTS {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
        }
        match transport.send(&request).and_then(|body| extract_content(&body)) {
            Ok(content) => return Ok(content),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

/// Single-turn completion: the prompt goes out as one `user` message.
pub fn get_completion(
    prompt: &str,
    model_id: &str,
    temperature: f64,
    transport: &mut dyn ChatTransport,
) -> Result<String> {
    get_completion_from_messages(&[ChatMessage::user(prompt)], model_id, temperature, transport)
}

/// Deterministic prompt asking for an exactly-shaped pipe table.
pub fn build_prompt(spec: &GenSpec) -> String {
    let mut prompt = format!(
        "Generate a synthetic tabular dataset about {}. \
         Produce exactly {} columns and {} rows.",
        spec.topic, spec.n_cols, spec.n_rows
    );
    if let Some(hints) = &spec.column_hints {
        if !hints.is_empty() {
            prompt.push_str(&format!(" Name the columns: {}.", hints.join(", ")));
        }
    }
    prompt.push_str(
        " Reply with only the table: a header row naming every column, then one \
         row per record, formatted as a pipe-delimited table. No commentary.",
    );
    prompt
}

// ---------------------------------------------------------------------------
// Reply parsing

/// `"5,395,532"` → `"5395532"`. Only cells shaped exactly like a
/// comma-grouped number are touched; everything else passes through.
fn strip_thousands(cell: &str) -> String {
    let trimmed = cell.trim();
    let body = trimmed
        .strip_prefix(['+', '-'])
        .unwrap_or(trimmed);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let groups: Vec<&str> = int_part.split(',').collect();
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let shaped = groups.len() >= 2
        && groups[0].len() <= 3
        && all_digits(groups[0])
        && groups[1..].iter().all(|g| g.len() == 3 && all_digits(g))
        && frac_part.map_or(true, all_digits);
    if shaped {
        trimmed.replace(',', "")
    } else {
        cell.to_string()
    }
}

fn split_pipe_row(line: &str) -> Vec<String> {
    let inner = line.trim().trim_start_matches('|').trim_end_matches('|');
    inner.split('|').map(|c| c.trim().to_string()).collect()
}

/// Markdown rule rows (`| --- | :--: |`) separate header from data.
fn is_rule_row(cells: &[String]) -> bool {
    !cells.is_empty()
        && cells.iter().all(|c| {
            !c.is_empty() && c.contains('-') && c.chars().all(|ch| matches!(ch, '-' | ':'))
        })
}

fn split_csv_row(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    cells.push(cur);
    cells.iter().map(|c| c.trim().to_string()).collect()
}

fn check_consistent(rows: &[Vec<String>]) -> Result<()> {
    let expected = rows[0].len();
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.len() != expected {
            return Err(Error::RaggedTableRow {
                row: i,
                expected,
                found: row.len(),
            });
        }
    }
    Ok(())
}

/// Find the first run of ≥2 consecutive lines sharing a cell count ≥2; the
/// run ends at the first mismatch, so surrounding prose is simply ignored.
fn consistent_block(cells: &[Vec<String>]) -> Option<Vec<Vec<String>>> {
    let start = (0..cells.len().saturating_sub(1))
        .find(|&i| cells[i].len() >= 2 && cells[i + 1].len() == cells[i].len())?;
    let width = cells[start].len();
    Some(
        cells[start..]
            .iter()
            .take_while(|row| row.len() == width)
            .cloned()
            .collect(),
    )
}

/// Pull header + data string rows out of reply text.
///
/// Pipe tables claim every line containing `|` and a row with the wrong cell
/// count is an error. Otherwise aligned columns (2+ spaces) are tried before
/// commas, so thousands separators inside aligned numbers don't masquerade
/// as delimiters; a comma table needs its first two lines to agree and
/// reports later width changes as ragged. Single-space splitting is the
/// last resort.
fn tokenize_table(text: &str) -> Result<Vec<Vec<String>>> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();

    if lines.iter().any(|l| l.contains('|')) {
        let rows: Vec<Vec<String>> = lines
            .iter()
            .filter(|l| l.contains('|'))
            .map(|l| split_pipe_row(l))
            .filter(|cells| !is_rule_row(cells))
            .collect();
        if rows.is_empty() {
            return Err(Error::NoTableFound);
        }
        check_consistent(&rows)?;
        return Ok(rows);
    }

    let aligned: Vec<Vec<String>> = lines.iter().map(|l| aligned_split(l)).collect();
    if let Some(block) = consistent_block(&aligned) {
        return Ok(block);
    }

    if let Some(start) = lines.iter().position(|l| l.contains(',')) {
        let run: Vec<Vec<String>> = lines[start..]
            .iter()
            .take_while(|l| l.contains(','))
            .map(|l| split_csv_row(l))
            .collect();
        if run.len() >= 2 && run[0].len() >= 2 && run[0].len() == run[1].len() {
            check_consistent(&run)?;
            return Ok(run);
        }
    }

    let spaced: Vec<Vec<String>> = lines.iter().map(|l| whitespace_split(l)).collect();
    consistent_block(&spaced).ok_or(Error::NoTableFound)
}

fn aligned_split(line: &str) -> Vec<String> {
    line.split("  ")
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect()
}

fn whitespace_split(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

/// Parse the first table found in LLM reply text into a typed dataset.
///
/// Handles pipe-delimited, comma-delimited, and aligned-column layouts;
/// thousands separators are stripped from numeric cells, so unit annotations
/// live in column names, never in values.
pub fn parse_table(text: &str) -> Result<Dataset> {
    let rows = tokenize_table(text)?;
    let headers: Vec<String> = rows[0].clone();
    let data: Vec<Vec<String>> = rows[1..]
        .iter()
        .map(|row| row.iter().map(|c| strip_thousands(c)).collect())
        .collect();
    from_string_table(&headers, &data, None)
}

/// Render a dataset as the pipe table [`parse_table`] reads back.
///
/// Numeric cells use the shortest round-tripping decimal form; missing cells
/// render empty. `parse_table(render_table(ds))` reproduces `ds`'s columns
/// and data for any dataset built by [`from_string_table`].
pub fn render_table(ds: &Dataset) -> String {
    let mut out = String::new();
    let names: Vec<&str> = ds.columns.iter().map(|c| c.name.as_str()).collect();
    out.push_str(&format!("| {} |\n", names.join(" | ")));
    out.push_str(&format!(
        "|{}\n",
        " --- |".repeat(ds.columns.len())
    ));
    for i in 0..ds.data.n_rows() {
        let cells: Vec<String> = ds
            .columns
            .iter()
            .enumerate()
            .map(|(j, meta)| {
                let v = ds.data.get(i, j);
                if v.is_nan() {
                    String::new()
                } else {
                    match &meta.kind {
                        ColumnKind::Numeric { .. } => format!("{v}"),
                        ColumnKind::Categorical { categories } => {
                            categories[v as usize].clone()
                        }
                    }
                }
            })
            .collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out
}

// ---------------------------------------------------------------------------
// End-to-end generation

/// Record of one generation call, persisted alongside the parsed dataset so
/// a human can audit what the model was asked and what it actually said.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub spec: GenSpec,
    pub prompt: String,
    pub raw_reply: String,
    pub parse_status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlmRun {
    pub dataset: Dataset,
    pub transcript: Transcript,
}

/// Prompt → completion → parse → shape validation.
///
/// A reply that fails to parse surfaces as [`Error::ParseFailure`] carrying
/// the full raw reply; a parseable reply with the wrong shape surfaces as
/// [`Error::TableCountMismatch`].
pub fn llm_generate_dataset(
    spec: &GenSpec,
    transport: &mut dyn ChatTransport,
) -> Result<LlmRun> {
    spec.validate()?;
    let prompt = build_prompt(spec);
    let raw_reply = get_completion(&prompt, &spec.model_id, spec.temperature, transport)?;
    let dataset = parse_table(&raw_reply).map_err(|e| Error::ParseFailure {
        reason: e.to_string(),
        raw: raw_reply.clone(),
    })?;
    let (rows, cols) = (dataset.data.n_rows(), dataset.data.n_cols());
    if rows != spec.n_rows || cols != spec.n_cols {
        return Err(Error::TableCountMismatch {
            rows,
            cols,
            want_rows: spec.n_rows,
            want_cols: spec.n_cols,
        });
    }
    Ok(LlmRun {
        dataset,
        transcript: Transcript {
            spec: spec.clone(),
            prompt,
            raw_reply,
            parse_status: "ok".to_string(),
        },
    })
}

/// Terminal conversation loop: each input line is sent with the full history,
/// the assistant reply is printed and appended. `exit`/`quit`/EOF end the
/// session. Returns the final history.
pub fn chat_loop<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    system_prompt: Option<&str>,
    model_id: &str,
    temperature: f64,
    transport: &mut dyn ChatTransport,
) -> Result<Vec<ChatMessage>> {
    let io_err = |e: std::io::Error| Error::Io {
        path: "<chat stream>".to_string(),
        source: e,
    };
    let mut history = Vec::new();
    if let Some(s) = system_prompt {
        history.push(ChatMessage::system(s));
    }
    for line in input.lines() {
        let line = line.map_err(io_err)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "exit" || line == "quit" {
            break;
        }
        history.push(ChatMessage::user(line));
        let reply = get_completion_from_messages(&history, model_id, temperature, transport)?;
        writeln!(output, "{reply}").map_err(io_err)?;
        history.push(ChatMessage::assistant(reply));
    }
    Ok(history)
}

// ---------------------------------------------------------------------------
// Transports

/// Scripted outcome for one [`MockTransport`] call.
#[derive(Clone, Debug)]
pub enum MockOutcome {
    /// Assistant text, wrapped into a well-formed chat-completions body.
    Content(String),
    /// Verbatim response body (for exercising body parsing).
    RawBody(String),
    /// Non-2xx status with body.
    Status(u16, String),
    /// Network-level failure.
    NetworkFailure(String),
}

/// Offline stand-in for the HTTP transport.
///
/// Outcomes play in order; the last one repeats forever. Every request is
/// recorded in `calls`, which doubles as proof that no network was touched.
pub struct MockTransport {
    script: VecDeque<MockOutcome>,
    pub calls: Vec<ChatRequest>,
}

impl MockTransport {
    pub fn replying(content: &str) -> Self {
        Self::scripted(vec![MockOutcome::Content(content.to_string())])
    }

    pub fn scripted(outcomes: Vec<MockOutcome>) -> Self {
        MockTransport {
            script: outcomes.into(),
            calls: Vec::new(),
        }
    }
}

fn wrap_content(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}

impl ChatTransport for MockTransport {
    fn send(&mut self, request: &ChatRequest) -> Result<String> {
        self.calls.push(request.clone());
        let outcome = if self.script.len() > 1 {
            self.script.pop_front().expect("len checked")
        } else {
            self.script
                .front()
                .cloned()
                .ok_or_else(|| Error::TransportFailure("mock script is empty".to_string()))?
        };
        match outcome {
            MockOutcome::Content(c) => Ok(wrap_content(&c)),
            MockOutcome::RawBody(b) => Ok(b),
            MockOutcome::Status(status, body) => Err(Error::TransportStatus { status, body }),
            MockOutcome::NetworkFailure(msg) => Err(Error::TransportFailure(msg)),
        }
    }
}

fn default_key_env() -> String {
    "LLM_API_KEY".to_string()
}

fn default_timeout() -> u64 {
    30
}

/// Connection settings for [`HttpTransport`]. The key itself never appears
/// here — only the name of the environment variable to read it from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    #[serde(default)]
    pub endpoint: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_model")]
    pub model_id: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: String::new(),
            api_key_env: default_key_env(),
            model_id: default_model(),
            timeout_secs: default_timeout(),
        }
    }
}

/// Chat-completions over HTTP: POST, bearer auth, JSON body.
pub struct HttpTransport {
    config: LlmConfig,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(config: LlmConfig) -> Result<Self> {
        if config.endpoint.is_empty() {
            return Err(Error::Usage(
                "LLM endpoint is not configured; set `endpoint` in the LLM config".to_string(),
            ));
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        Ok(HttpTransport { config, agent })
    }
}

impl ChatTransport for HttpTransport {
    fn send(&mut self, request: &ChatRequest) -> Result<String> {
        let key = std::env::var(&self.config.api_key_env).map_err(|_| {
            Error::Usage(format!(
                "environment variable {} (API key) is not set",
                self.config.api_key_env
            ))
        })?;
        let body = serde_json::to_string(request)
            .map_err(|e| Error::TransportFailure(format!("request serialization: {e}")))?;
        let response = self
            .agent
            .post(&self.config.endpoint)
            .set("Authorization", &format!("Bearer {key}"))
            .set("Content-Type", "application/json")
            .send_string(&body);
        match response {
            Ok(r) => r
                .into_string()
                .map_err(|e| Error::TransportFailure(format!("reading body: {e}"))),
            Err(ureq::Error::Status(status, r)) => Err(Error::TransportStatus {
                status,
                body: r.into_string().unwrap_or_default(),
            }),
            Err(e) => Err(Error::TransportFailure(e.to_string())),
        }
    }
}
