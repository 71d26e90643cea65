//! Pluggable completion interface: a live chat-completions HTTP backend that
//! records every exchange, and a deterministic replay backend that serves
//! recorded responses by request hash. Replay makes whole experiment runs
//! bit-reproducible.

use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm unavailable: {0}")]
    Unavailable(String),
    #[error("no transcript for request hash {request_hash}")]
    ReplayMiss { request_hash: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("no SQL found in response")]
    NoSqlFound,
    #[error("transcript store error: {0}")]
    Store(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_text: String,
    pub user_text: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl CompletionRequest {
    /// Content hash over (system, user, model, temperature). Length-prefixed
    /// fields keep the digest unambiguous; max_tokens is deliberately not
    /// part of the identity.
    pub fn request_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for field in [
            self.system_text.as_str(),
            self.user_text.as_str(),
            self.model.as_str(),
            &render_temperature(self.temperature),
        ] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

fn render_temperature(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

/// One recorded exchange; stored as `<request_hash>.json` in the store
/// directory with the request echoed for auditability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub request_hash: String,
    pub request: CompletionRequest,
    pub response_text: String,
    pub captured_at: String,
}

/// Append-only directory of transcripts, one file per request hash.
#[derive(Debug)]
pub struct TranscriptStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl TranscriptStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, LlmError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| LlmError::Store(e.to_string()))?;
        Ok(TranscriptStore {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, request_hash: &str) -> PathBuf {
        self.dir.join(format!("{request_hash}.json"))
    }

    pub fn put(&self, transcript: &Transcript) -> Result<(), LlmError> {
        let _guard = self.write_lock.lock().expect("store lock");
        let mut content =
            serde_json::to_string_pretty(transcript).map_err(|e| LlmError::Store(e.to_string()))?;
        content.push('\n');
        std::fs::write(self.path_for(&transcript.request_hash), content)
            .map_err(|e| LlmError::Store(e.to_string()))
    }

    pub fn get(&self, request_hash: &str) -> Result<Option<Transcript>, LlmError> {
        let path = self.path_for(request_hash);
        if !path.exists() {
            return Ok(None);
        }
        let content = std::fs::read_to_string(&path).map_err(|e| LlmError::Store(e.to_string()))?;
        let transcript =
            serde_json::from_str(&content).map_err(|e| LlmError::Store(e.to_string()))?;
        Ok(Some(transcript))
    }

    /// Records a response for a request, stamping the capture time.
    pub fn record(&self, request: &CompletionRequest, response_text: &str) -> Result<(), LlmError> {
        self.put(&Transcript {
            request_hash: request.request_hash(),
            request: request.clone(),
            response_text: response_text.to_string(),
            captured_at: chrono::Utc::now().to_rfc3339(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 4,
            initial_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    fn delay_for(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        (self.initial_delay * factor).min(self.max_delay)
    }
}

/// Counting semaphore bounding concurrent live calls.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().expect("semaphore lock");
        while *permits == 0 {
            permits = self.available.wait(permits).expect("semaphore wait");
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.semaphore.permits.lock().expect("semaphore lock");
        *permits += 1;
        self.semaphore.available.notify_one();
    }
}

pub struct LiveConfig {
    pub endpoint: String,
    pub api_key: String,
    pub retry: RetryPolicy,
    pub in_flight_cap: usize,
    pub timeout: Duration,
}

pub struct LiveBackend {
    config: LiveConfig,
    http: reqwest::blocking::Client,
    store: TranscriptStore,
    semaphore: Semaphore,
}

pub enum Backend {
    Live(LiveBackend),
    Replay(TranscriptStore),
}

/// Completion client over a live or replay backend. Safe for concurrent use.
pub struct CompletionClient {
    backend: Backend,
}

impl CompletionClient {
    pub fn live(config: LiveConfig, store: TranscriptStore) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Unavailable(e.to_string()))?;
        let semaphore = Semaphore::new(config.in_flight_cap);
        Ok(CompletionClient {
            backend: Backend::Live(LiveBackend {
                config,
                http,
                store,
                semaphore,
            }),
        })
    }

    pub fn replay(store: TranscriptStore) -> Self {
        CompletionClient {
            backend: Backend::Replay(store),
        }
    }

    /// Live: POSTs the chat-completions request, retrying rate limits and
    /// transient server errors with bounded exponential backoff, and records
    /// the transcript. Replay: returns the stored response for the request
    /// hash, or [`LlmError::ReplayMiss`].
    pub fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        match &self.backend {
            Backend::Replay(store) => {
                let hash = request.request_hash();
                match store.get(&hash)? {
                    Some(transcript) => Ok(transcript.response_text),
                    None => Err(LlmError::ReplayMiss { request_hash: hash }),
                }
            }
            Backend::Live(live) => {
                let _permit = live.semaphore.acquire();
                let response = live_complete(live, request)?;
                live.store.record(request, &response)?;
                Ok(response)
            }
        }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    temperature: f64,
    max_tokens: u32,
    messages: Vec<WireMessage<'a>>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: String,
}

fn live_complete(live: &LiveBackend, request: &CompletionRequest) -> Result<String, LlmError> {
    let body = WireRequest {
        model: &request.model,
        temperature: request.temperature,
        max_tokens: request.max_tokens,
        messages: vec![
            WireMessage {
                role: "system",
                content: &request.system_text,
            },
            WireMessage {
                role: "user",
                content: &request.user_text,
            },
        ],
    };

    let mut attempt = 0u32;
    loop {
        let mut builder = live.http.post(&live.config.endpoint).json(&body);
        if !live.config.api_key.is_empty() {
            builder = builder.bearer_auth(&live.config.api_key);
        }
        let outcome = builder.send();
        let retryable = match outcome {
            Ok(response) => {
                let status = response.status();
                if status.is_success() {
                    let parsed: WireResponse = response
                        .json()
                        .map_err(|e| LlmError::Unavailable(format!("malformed response: {e}")))?;
                    let choice =
                        parsed.choices.into_iter().next().ok_or_else(|| {
                            LlmError::Unavailable("response had no choices".into())
                        })?;
                    return Ok(choice.message.content);
                }
                if status.as_u16() == 429 || status.is_server_error() {
                    None // retry below
                } else {
                    return Err(LlmError::Unavailable(format!("HTTP {status}")));
                }
            }
            Err(e) => Some(e.to_string()),
        };

        if attempt >= live.config.retry.max_retries {
            return match retryable {
                Some(message) => Err(LlmError::Unavailable(message)),
                None => Err(LlmError::RateLimited {
                    attempts: attempt + 1,
                }),
            };
        }
        std::thread::sleep(live.config.retry.delay_for(attempt));
        attempt += 1;
    }
}

/// Pulls the SQL out of a chain-of-thought response: the last non-empty
/// fenced code block, or failing that the last run of lines starting with
/// SELECT or WITH. The trailing semicolon is stripped.
pub fn extract_sql(response: &str) -> Result<String, LlmError> {
    if let Some(block) = last_fenced_block(response) {
        return Ok(trim_sql(&block));
    }
    if let Some(run) = last_sql_run(response) {
        return Ok(trim_sql(&run));
    }
    Err(LlmError::NoSqlFound)
}

fn last_fenced_block(response: &str) -> Option<String> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("```") {
            match current.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
            continue;
        }
        if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    blocks.into_iter().rev().find(|b| !b.trim().is_empty())
}

fn last_sql_run(response: &str) -> Option<String> {
    let lines: Vec<&str> = response.lines().collect();
    let starts_sql = |line: &str| {
        let upper = line.trim_start().to_uppercase();
        upper.starts_with("SELECT") || upper.starts_with("WITH")
    };
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if starts_sql(lines[i]) {
            let start = i;
            let mut end = i + 1;
            while end < lines.len() && !lines[end].trim().is_empty() && !starts_sql(lines[end]) {
                end += 1;
            }
            best = Some((start, end));
            i = end;
        } else {
            i += 1;
        }
    }
    best.map(|(start, end)| lines[start..end].join("\n"))
}

fn trim_sql(text: &str) -> String {
    text.trim().trim_end_matches(';').trim().to_string()
}
