//! Completion backends: scripted fixtures, an HTTP chat-completions client,
//! and a recorder that turns live runs into fixtures.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const GEN_TOKEN_ENV: &str = "ASPLOOP_GEN_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid request: {0}")]
    Argument(String),
    /// Worth retrying.
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("{backend} returned {got} completions, {wanted} requested")]
    Short { backend: String, got: usize, wanted: usize },
    #[error("{0}")]
    Backend(String),
}

pub trait Generator: Send + Sync {
    /// Backend identifier for manifests and error messages.
    fn id(&self) -> String;

    fn complete(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<Completion>, GenError>;

    /// Whether repeated runs return the same completions.
    fn reproducible(&self) -> bool {
        true
    }
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// One line of a scripted fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub prompt_sha256: String,
    pub completions: Vec<String>,
    pub token_counts: Vec<u64>,
}

pub fn script_to_jsonl(entries: &[ScriptEntry]) -> String {
    entries.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect()
}

/// Replays completions keyed by prompt hash. Entries with the same hash
/// queue up; each call consumes from the front.
pub struct ScriptedGenerator {
    queues: Mutex<HashMap<String, VecDeque<Completion>>>,
    name: String,
}

impl ScriptedGenerator {
    pub fn from_script(entries: Vec<ScriptEntry>, name: impl Into<String>) -> Result<Self, GenError> {
        let mut queues: HashMap<String, VecDeque<Completion>> = HashMap::new();
        for e in entries {
            if e.completions.len() != e.token_counts.len() && !e.token_counts.is_empty() {
                return Err(GenError::Backend(format!(
                    "script entry {} has {} completions but {} token counts",
                    e.prompt_sha256,
                    e.completions.len(),
                    e.token_counts.len()
                )));
            }
            let q = queues.entry(e.prompt_sha256).or_default();
            for (i, text) in e.completions.into_iter().enumerate() {
                q.push_back(Completion { text, output_tokens: e.token_counts.get(i).copied().unwrap_or(0) });
            }
        }
        Ok(ScriptedGenerator { queues: Mutex::new(queues), name: name.into() })
    }

    pub fn parse_jsonl(text: &str, name: impl Into<String>) -> Result<Self, GenError> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| GenError::Backend(format!("script line {}: {e}", i + 1))))
            .collect::<Result<Vec<ScriptEntry>, _>>()?;
        Self::from_script(entries, name)
    }

    pub fn load(path: &Path) -> Result<Self, GenError> {
        let text = std::fs::read_to_string(path).map_err(|e| GenError::Backend(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_jsonl(&text, format!("scripted:{}", path.display()))
    }

    /// Convenience for tests: completions keyed by the prompt text itself.
    pub fn from_entries(entries: Vec<(String, Vec<Completion>)>) -> Self {
        let script = entries
            .into_iter()
            .map(|(prompt, cs)| ScriptEntry {
                prompt_sha256: prompt_sha256(&prompt),
                token_counts: cs.iter().map(|c| c.output_tokens).collect(),
                completions: cs.into_iter().map(|c| c.text).collect(),
            })
            .collect();
        Self::from_script(script, "scripted").expect("entries are consistent")
    }
}

impl Generator for ScriptedGenerator {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn complete(&self, prompt: &str, n: usize, _temperature: f64) -> Result<Vec<Completion>, GenError> {
        let mut queues = self.queues.lock().unwrap();
        let q = queues.entry(prompt_sha256(prompt)).or_default();
        let take = n.min(q.len());
        Ok(q.drain(..take).collect())
    }
}

/// Chat-completions style endpoint.
pub struct HttpGenerator {
    url: String,
    model: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpGenerator {
    pub fn new(url: impl Into<String>, model: impl Into<String>, token: Option<String>, timeout: Duration) -> Result<Self, GenError> {
        let client = reqwest::blocking::Client::builder().timeout(timeout).build().map_err(|e| GenError::Backend(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpGenerator { url: url.into(), model: model.into(), token, client })
    }

    /// Reads the bearer token from the environment.
    pub fn from_env(url: impl Into<String>, model: impl Into<String>) -> Result<Self, GenError> {
        Self::new(url, model, std::env::var(GEN_TOKEN_ENV).ok(), Duration::from_secs(300))
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    completion_tokens: u64,
}

impl Generator for HttpGenerator {
    fn id(&self) -> String {
        format!("http:{}:{}", self.url, self.model)
    }

    fn reproducible(&self) -> bool {
        false
    }

    fn complete(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<Completion>, GenError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "n": n,
            "temperature": temperature,
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| GenError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(GenError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(GenError::Backend(format!("{} answered HTTP {status}", self.url)));
        }
        let parsed: ChatResponse = resp.json().map_err(|e| GenError::Backend(format!("bad response body: {e}")))?;
        // Usage reports the total; spread it evenly over the choices.
        let total = parsed.usage.map_or(0, |u| u.completion_tokens);
        let k = parsed.choices.len().max(1) as u64;
        Ok(parsed
            .choices
            .into_iter()
            .enumerate()
            .map(|(i, c)| Completion { text: c.message.content.unwrap_or_default(), output_tokens: total / k + u64::from((i as u64) < total % k) })
            .collect())
    }
}

/// Wraps a generator and keeps every call as a script entry.
pub struct RecordingGenerator<G> {
    inner: G,
    log: Mutex<Vec<ScriptEntry>>,
}

impl<G: Generator> RecordingGenerator<G> {
    pub fn new(inner: G) -> Self {
        RecordingGenerator { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn entries(&self) -> Vec<ScriptEntry> {
        self.log.lock().unwrap().clone()
    }

    pub fn into_inner(self) -> G {
        self.inner
    }
}

impl<G: Generator> Generator for RecordingGenerator<G> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn reproducible(&self) -> bool {
        self.inner.reproducible()
    }

    fn complete(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<Completion>, GenError> {
        let out = self.inner.complete(prompt, n, temperature)?;
        self.log.lock().unwrap().push(ScriptEntry {
            prompt_sha256: prompt_sha256(prompt),
            completions: out.iter().map(|c| c.text.clone()).collect(),
            token_counts: out.iter().map(|c| c.output_tokens).collect(),
        });
        Ok(out)
    }
}

impl<G: Generator + ?Sized> Generator for &G {
    fn id(&self) -> String {
        (**self).id()
    }
    fn reproducible(&self) -> bool {
        (**self).reproducible()
    }
    fn complete(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<Completion>, GenError> {
        (**self).complete(prompt, n, temperature)
    }
}
