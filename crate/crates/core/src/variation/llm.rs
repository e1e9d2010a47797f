use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ScoreExpr;

use super::{
    validate_offspring, MockOperator, PromptTemplates, RejectReason, Rejection, VariationError, VariationOperator,
    VariationReport,
};

/// Environment variable holding the endpoint's API key.
pub const API_KEY_ENV: &str = "LLM_API_KEY";

/// A string that never shows up in `Debug` output or serialized configs.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SecretString(String);

impl SecretString {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .map(Self)
    }
}

impl fmt::Debug for SecretString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretString(***)")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmEndpointConfig {
    /// Base of an OpenAI-compatible API; `/chat/completions` is appended.
    pub base_url: String,
    pub model_name: String,
    pub temperature_crossover: f64,
    pub temperature_mutation: f64,
    #[serde(skip)]
    pub api_key: SecretString,
    pub timeout_secs: u64,
    pub max_retries: usize,
    /// First retry delay; doubles on each further retry.
    pub backoff_ms: u64,
    /// Maximum concurrent requests.
    pub parallelism: usize,
    /// Fall back to the mock operator when the endpoint keeps failing.
    pub mock_fallback: bool,
    pub transcripts_dir: Option<PathBuf>,
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-3.5-turbo-0613".into(),
            temperature_crossover: 1.0,
            temperature_mutation: 1.5,
            api_key: SecretString::default(),
            timeout_secs: 60,
            max_retries: 3,
            backoff_ms: 1000,
            parallelism: 4,
            mock_fallback: false,
            transcripts_dir: None,
        }
    }
}

impl LlmEndpointConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, t) in [
            ("temperature_crossover", self.temperature_crossover),
            ("temperature_mutation", self.temperature_mutation),
        ] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(format!("{name} must be a finite number >= 0, got {t}"));
            }
        }
        if self.parallelism == 0 {
            return Err("parallelism must be at least 1".into());
        }
        if self.base_url.trim().is_empty() || self.model_name.trim().is_empty() {
            return Err("base_url and model_name must be non-empty".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Body of a chat-completion call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn user(model: &str, temperature: f64, prompt: String) -> Self {
        Self {
            model: model.to_string(),
            temperature,
            messages: vec![ChatMessage {
                role: "user".into(),
                content: prompt,
            }],
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum TransportError {
    #[error("request failed: {0}")]
    Request(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl TransportError {
    /// Client errors other than rate limiting will not go away on retry.
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => true,
        }
    }
}

/// Anything that turns a chat request into the assistant's reply text.
pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Contents of every fenced code block, in order. The first line of a
/// multi-line block is an info string (e.g. a language tag) and is dropped;
/// comment lines starting with `#` or `//` are ignored.
pub fn extract_code_blocks(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let Some(close) = after.find("```") else { break };
        let body = &after[..close];
        let body = match body.split_once('\n') {
            Some((_info, tail)) => tail,
            None => body,
        };
        let code: Vec<&str> = body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"))
            .collect();
        if !code.is_empty() {
            out.push(code.join(" "));
        }
        rest = &after[close + 3..];
    }
    out
}

/// Variation through a chat-completion endpoint.
pub struct LlmOperator<C> {
    pub client: C,
    pub config: LlmEndpointConfig,
    pub templates: PromptTemplates,
    pub max_offspring: usize,
    sleep: fn(Duration),
}

impl<C: ChatClient> LlmOperator<C> {
    pub fn new(client: C, config: LlmEndpointConfig, templates: PromptTemplates, max_offspring: usize) -> Self {
        Self {
            client,
            config,
            templates,
            max_offspring,
            sleep: std::thread::sleep,
        }
    }

    /// Replaces the delay function used between retries.
    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    fn call(&self, request: &ChatRequest, label: &str) -> Result<String, VariationError> {
        let attempts = self.config.max_retries + 1;
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                (self.sleep)(delay);
                delay *= 2;
            }
            let result = self.client.complete(request);
            self.log_transcript(label, attempt, request, &result);
            match result {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() => last = Some(e),
                Err(e) => {
                    return Err(VariationError::Transport {
                        attempts: attempt + 1,
                        source: e,
                    })
                }
            }
        }
        Err(VariationError::Transport {
            attempts,
            source: last.expect("at least one attempt"),
        })
    }

    fn log_transcript(&self, label: &str, attempt: usize, req: &ChatRequest, res: &Result<String, TransportError>) {
        let Some(dir) = &self.config.transcripts_dir else {
            return;
        };
        let entry = serde_json::json!({
            "request": req,
            "response": res.as_ref().ok(),
            "error": res.as_ref().err().map(|e| e.to_string()),
        });
        let path = dir.join(format!("{label}-{attempt}.json"));
        let _ = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(path, serde_json::to_vec_pretty(&entry).unwrap_or_default()));
    }

    fn fallback_or<F>(&self, err: VariationError, mock: F) -> Result<VariationReport, VariationError>
    where
        F: FnOnce(&MockOperator) -> Result<VariationReport, VariationError>,
    {
        if !self.config.mock_fallback {
            return Err(err);
        }
        let mut report = mock(&MockOperator {
            max_offspring: self.max_offspring,
        })?;
        report.fallback = true;
        Ok(report)
    }
}

fn no_block(text: String) -> Rejection {
    Rejection {
        raw: text,
        reason: RejectReason::NoCodeBlock,
    }
}

impl<C: ChatClient> VariationOperator for LlmOperator<C> {
    fn crossover(&self, parents: &[(ScoreExpr, f64)], seed: u64) -> Result<VariationReport, VariationError> {
        if parents.len() < 2 {
            return Err(VariationError::TooFewParents(parents.len()));
        }
        let prompt = self.templates.render_crossover(parents, self.max_offspring);
        let req = ChatRequest::user(&self.config.model_name, self.config.temperature_crossover, prompt);
        let text = match self.call(&req, &format!("crossover-{seed:016x}")) {
            Ok(t) => t,
            Err(e) => return self.fallback_or(e, |m| m.crossover(parents, seed)),
        };
        let mut report = VariationReport {
            requested: self.max_offspring,
            ..Default::default()
        };
        let blocks = extract_code_blocks(&text);
        if blocks.is_empty() {
            report.discarded.push(no_block(text));
            return Ok(report);
        }
        for block in blocks {
            if report.accepted.len() == self.max_offspring {
                break;
            }
            match validate_offspring(&block) {
                Ok(e) => report.accept(e),
                Err(r) => report.discarded.push(r),
            }
        }
        Ok(report)
    }

    fn mutate(&self, e: &ScoreExpr, seed: u64) -> Result<VariationReport, VariationError> {
        let prompt = self.templates.render_mutation(e);
        let req = ChatRequest::user(&self.config.model_name, self.config.temperature_mutation, prompt);
        let text = match self.call(&req, &format!("mutation-{seed:016x}")) {
            Ok(t) => t,
            Err(err) => return self.fallback_or(err, |m| m.mutate(e, seed)),
        };
        let mut report = VariationReport {
            requested: 1,
            ..Default::default()
        };
        let blocks = extract_code_blocks(&text);
        if blocks.is_empty() {
            report.discarded.push(no_block(text));
            return Ok(report);
        }
        for block in blocks {
            match validate_offspring(&block) {
                Ok(m) => {
                    report.accept(m);
                    break;
                }
                Err(r) => report.discarded.push(r),
            }
        }
        Ok(report)
    }

    fn crossover_batch(
        &self,
        groups: &[Vec<(ScoreExpr, f64)>],
        seeds: &[u64],
    ) -> Vec<Result<VariationReport, VariationError>> {
        let jobs: Vec<(&Vec<(ScoreExpr, f64)>, u64)> = groups.iter().zip(seeds.iter().copied()).collect();
        run_bounded(&jobs, self.config.parallelism, |(g, s)| self.crossover(g, *s))
    }

    fn mutate_batch(&self, exprs: &[ScoreExpr], seeds: &[u64]) -> Vec<Result<VariationReport, VariationError>> {
        let jobs: Vec<(&ScoreExpr, u64)> = exprs.iter().zip(seeds.iter().copied()).collect();
        run_bounded(&jobs, self.config.parallelism, |(e, s)| self.mutate(e, *s))
    }
}

/// Runs `f` over `jobs` with at most `limit` threads at once, keeping order.
fn run_bounded<J: Sync, R: Send>(jobs: &[J], limit: usize, f: impl Fn(&J) -> R + Sync) -> Vec<R> {
    let mut out = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(limit.max(1)) {
        if chunk.len() == 1 {
            out.push(f(&chunk[0]));
            continue;
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|j| s.spawn(|| f(j))).collect();
            out.extend(
                handles
                    .into_iter()
                    .map(|h| h.join().expect("variation worker panicked")),
            );
        });
    }
    out
}
