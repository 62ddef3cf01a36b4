//! Candidate-output generation against chat-completion endpoints.
//!
//! All network access goes through the [`ChatEndpoint`] trait so tests can
//! substitute scripted endpoints. Generation is resumable: stored
//! translations keyed by (item, model, prompt hash, decoding) are reused,
//! and a model that keeps failing yields an *empty* translation — coverage
//! stays total and the empty text loses its comparisons by the judge
//! prompt's own rule rather than crashing the run.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::costmodel::estimate_tokens;
use crate::datamodel::{now_timestamp, Item, ItemSet, ModelRef, Translation};
use crate::error::{Error, Result};
use crate::hashing::prompt_hash;
use crate::store::TranslationStore;

/// The translation instruction sent to candidate models, as a single user
/// message with `{{target_language}}` and `{{source_text}}` slots.
pub const TRANSLATE_PROMPT_TEMPLATE: &str = include_str!("../prompts/translate_prompt.txt");

/// Content hash of [`TRANSLATE_PROMPT_TEMPLATE`]; stored in generation
/// metadata and the report checklist.
pub fn translate_prompt_id() -> &'static str {
    static ID: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    ID.get_or_init(|| prompt_hash(TRANSLATE_PROMPT_TEMPLATE))
}

/// Render the translation prompt for one item.
pub fn render_translate_prompt(item: &Item) -> String {
    TRANSLATE_PROMPT_TEMPLATE
        .replace("{{target_language}}", item.direction.target_language())
        .replace("{{source_text}}", &item.source_text)
}

// ---------------------------------------------------------------------------
// Endpoint profile and wire types
// ---------------------------------------------------------------------------

/// How to talk to one HTTP endpoint: auth, timeouts, retry and concurrency
/// budgets. Durations are plain milliseconds so profiles round-trip through
/// config files unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointProfile {
    #[serde(default)]
    pub base_url: String,
    /// Name of the environment variable holding the API key; empty means
    /// the endpoint is unauthenticated.
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default = "default_timeout_ms")]
    pub request_timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_ms: u64,
}

fn default_timeout_ms() -> u64 {
    120_000
}
fn default_max_retries() -> u32 {
    3
}
fn default_max_concurrency() -> usize {
    4
}
fn default_backoff_ms() -> u64 {
    250
}

impl Default for EndpointProfile {
    fn default() -> Self {
        EndpointProfile {
            base_url: String::new(),
            api_key_env: String::new(),
            request_timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            max_concurrency: default_max_concurrency(),
            retry_backoff_ms: default_backoff_ms(),
        }
    }
}

impl EndpointProfile {
    pub fn validate(&self) -> Result<()> {
        if self.max_concurrency == 0 {
            return Err(Error::Config("max_concurrency must be at least 1".into()));
        }
        Ok(())
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }

    pub fn retry_backoff(&self) -> Duration {
        Duration::from_millis(self.retry_backoff_ms)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// One chat-completion request in the common JSON wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

impl ChatRequest {
    /// A single-user-message request under a model's decoding settings.
    pub fn user_message(model: &ModelRef, content: String) -> Self {
        ChatRequest {
            model: model.id.clone(),
            messages: vec![ChatMessage { role: "user".into(), content }],
            temperature: model.decoding.temperature,
            max_tokens: model.decoding.max_output_tokens,
            extra: model.decoding.extra.clone(),
        }
    }
}

/// A successful chat completion. Token counts are `None` when the endpoint
/// reported no usage block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
}

/// Why a chat call failed.
#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    /// Network-level failure (connect, timeout, TLS, ...). Retryable.
    #[error("transport error: {0}")]
    Transport(String),
    /// Non-success HTTP status. Retryable.
    #[error("http status {status}: {body}")]
    Http { status: u16, body: String },
    /// The endpoint answered but declined to produce content. Not retried.
    #[error("endpoint refused: {0}")]
    Refused(String),
}

/// Anything that can answer a chat request. Implementations must be safe to
/// call from worker threads.
pub trait ChatEndpoint: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, EndpointError>;
}

// ---------------------------------------------------------------------------
// HTTP endpoint
// ---------------------------------------------------------------------------

/// Blocking HTTP client for `POST {base_url}/chat/completions`.
pub struct HttpEndpoint {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    /// Build a client for the profile. Fails fast if the profile names an
    /// API-key environment variable that is unset.
    pub fn new(profile: &EndpointProfile) -> Result<Self> {
        profile.validate()?;
        if profile.base_url.is_empty() {
            return Err(Error::Config("endpoint base_url is empty".into()));
        }
        let api_key = if profile.api_key_env.is_empty() {
            None
        } else {
            match std::env::var(&profile.api_key_env) {
                Ok(key) if !key.is_empty() => Some(key),
                _ => {
                    return Err(Error::Config(format!(
                        "API key environment variable `{}` is not set",
                        profile.api_key_env
                    )))
                }
            }
        };
        let agent = ureq::AgentBuilder::new()
            .timeout(profile.request_timeout())
            .build();
        Ok(HttpEndpoint { base_url: profile.base_url.trim_end_matches('/').to_string(), api_key, agent })
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
    #[serde(flatten)]
    extra: &'a BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

impl ChatEndpoint for HttpEndpoint {
    fn chat(&self, request: &ChatRequest) -> std::result::Result<ChatResponse, EndpointError> {
        let url = format!("{}/chat/completions", self.base_url);
        let mut req = self.agent.post(&url).set("content-type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("authorization", &format!("Bearer {key}"));
        }
        let body = WireRequest {
            model: &request.model,
            messages: &request.messages,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            extra: &request.extra,
        };
        let response = req.send_json(&body).map_err(|e| match e {
            ureq::Error::Status(status, response) => EndpointError::Http {
                status,
                body: response.into_string().unwrap_or_default(),
            },
            ureq::Error::Transport(t) => EndpointError::Transport(t.to_string()),
        })?;
        let parsed: WireResponse = response
            .into_json()
            .map_err(|e| EndpointError::Transport(format!("bad response body: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| EndpointError::Refused("response carried no choices".into()))?;
        if choice.finish_reason.as_deref() == Some("content_filter") {
            return Err(EndpointError::Refused("content filtered".into()));
        }
        let content = choice
            .message
            .content
            .ok_or_else(|| EndpointError::Refused("response carried no content".into()))?;
        let usage = parsed.usage;
        Ok(ChatResponse {
            content,
            input_tokens: usage.as_ref().and_then(|u| u.prompt_tokens),
            output_tokens: usage.as_ref().and_then(|u| u.completion_tokens),
        })
    }
}

/// Call with retries and exponential backoff. Transport and HTTP errors are
/// retried up to `max_retries` additional attempts; refusals are final.
pub fn call_with_retries(
    endpoint: &dyn ChatEndpoint,
    request: &ChatRequest,
    max_retries: u32,
    backoff: Duration,
) -> std::result::Result<ChatResponse, EndpointError> {
    let mut attempt = 0;
    loop {
        match endpoint.chat(request) {
            Ok(response) => return Ok(response),
            Err(e @ EndpointError::Refused(_)) => return Err(e),
            Err(e) => {
                if attempt >= max_retries {
                    return Err(e);
                }
                std::thread::sleep(backoff * 2u32.saturating_pow(attempt));
                attempt += 1;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Cache key metadata stamped on every generated translation.
fn generation_meta(model: &ModelRef, error: Option<&str>) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("prompt_hash".to_string(), translate_prompt_id().to_string());
    meta.insert("decoding".to_string(), model.decoding.fingerprint());
    if let Some(e) = error {
        meta.insert("error".to_string(), e.to_string());
    }
    meta
}

/// True when a stored record was produced by this prompt and decoding and
/// can be reused instead of re-calling the endpoint.
fn is_cache_hit(record: &Translation, model: &ModelRef) -> bool {
    record.generation_meta.get("prompt_hash").map(String::as_str) == Some(translate_prompt_id())
        && record.generation_meta.get("decoding").map(String::as_str)
            == Some(model.decoding.fingerprint().as_str())
}

/// Translate one item, degrading to an empty translation (with the error
/// recorded in metadata) if the endpoint keeps failing.
pub fn translate_item(
    item: &Item,
    model: &ModelRef,
    profile: &EndpointProfile,
    endpoint: &dyn ChatEndpoint,
) -> Translation {
    let request = ChatRequest::user_message(model, render_translate_prompt(item));
    match call_with_retries(endpoint, &request, profile.max_retries, profile.retry_backoff()) {
        Ok(response) => Translation {
            item_id: item.id.clone(),
            model_id: model.id.clone(),
            text: response.content.trim().to_string(),
            generated_at: now_timestamp(),
            generation_meta: generation_meta(model, None),
        },
        Err(e) => Translation {
            item_id: item.id.clone(),
            model_id: model.id.clone(),
            text: String::new(),
            generated_at: now_timestamp(),
            generation_meta: generation_meta(model, Some(&e.to_string())),
        },
    }
}

/// Outcome counts for a generation run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenerateSummary {
    /// Fresh endpoint calls that produced text.
    pub generated: usize,
    /// Items served from the store without an endpoint call.
    pub cached: usize,
    /// Fresh endpoint calls that still failed after retries (stored empty).
    pub failed: usize,
}

/// Generate (or reuse) translations of every item by `model`, writing new
/// records through the store. `retry_failed` forces re-generation of stored
/// records whose text is empty due to a recorded error; by default every
/// stored record is reused, so a second identical run makes no calls.
pub fn generate_all(
    items: &ItemSet,
    model: &ModelRef,
    profile: &EndpointProfile,
    endpoint: &dyn ChatEndpoint,
    store: &mut TranslationStore,
    retry_failed: bool,
) -> Result<GenerateSummary> {
    profile.validate()?;
    let mut summary = GenerateSummary::default();

    let todo: Vec<&Item> = items
        .items
        .iter()
        .filter(|item| match store.get(&item.id, &model.id) {
            Some(record) if is_cache_hit(record, model) => {
                let failed_before = record.text.is_empty() && record.generation_meta.contains_key("error");
                retry_failed && failed_before
            }
            Some(_) => true, // stored under a different prompt/decoding: regenerate
            None => true,
        })
        .collect();
    summary.cached = items.len() - todo.len();

    if todo.is_empty() {
        return Ok(summary);
    }

    // Fixed worker pool over a shared work index; results funnel through a
    // channel to this thread, the only writer.
    let next = AtomicUsize::new(0);
    let workers = profile.max_concurrency.min(todo.len());
    let (tx, rx) = mpsc::channel::<Translation>();
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let todo = &todo;
            scope.spawn(move || {
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= todo.len() {
                        break;
                    }
                    let record = translate_item(todo[i], model, profile, endpoint);
                    if tx.send(record).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for record in rx {
            if record.text.is_empty() {
                summary.failed += 1;
            } else {
                summary.generated += 1;
            }
            store.insert_persist(record)?;
        }
        Ok(())
    })?;
    Ok(summary)
}

/// Estimate request/response token counts for a chat exchange when the
/// endpoint reported no usage.
pub fn estimated_usage(request: &ChatRequest, response_text: &str) -> (u64, u64) {
    let prompt_bytes: u64 = request.messages.iter().map(|m| estimate_tokens(&m.content)).sum();
    (prompt_bytes, estimate_tokens(response_text))
}
