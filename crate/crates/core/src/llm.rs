//! Provider-agnostic chat and embedding access with record/replay cassettes.
//!
//! In `replay` mode a [`Gateway`] owns no backend at all, so no request can
//! reach the network; every answer comes from the loaded [`Cassette`].

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Model name selecting the built-in hashed-trigram embedding backend.
pub const OFFLINE_EMBEDDING_MODEL: &str = "offline-trigram-256";
pub const OFFLINE_EMBEDDING_DIM: usize = 256;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CHAT_MODEL: &str = "gpt-4o";
pub const CASSETTE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("cassette miss for request {key} (prompt: \"{prompt}\")")]
    CassetteMiss { key: String, prompt: String },
    #[error("{mode} mode requires a loaded cassette")]
    NoCassette { mode: LlmMode },
    #[error("live mode requires a provider backend")]
    NoBackend,
    #[error("provider returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("provider request failed: {0}")]
    Transport(String),
    #[error("unexpected provider response: {0}")]
    BadResponse(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cassette {path}: {message}")]
    CassetteIo { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub seed: u64,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self {
            model: model.into(),
            temperature: 0.0,
            seed: DEFAULT_SEED,
            messages,
        }
    }

    fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("no messages".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} must be non-negative",
                self.temperature
            )));
        }
        Ok(())
    }

    /// A short excerpt of the last user message, for error reports.
    pub fn prompt_excerpt(&self) -> String {
        let text = self
            .messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .or(self.messages.last())
            .map(|m| m.content.as_str())
            .unwrap_or("");
        let line = text.lines().next().unwrap_or("");
        let excerpt: String = line.chars().take(80).collect();
        if excerpt.len() < text.len() {
            format!("{excerpt}...")
        } else {
            excerpt
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingRequest {
    pub model: String,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmMode {
    Live,
    Record,
    Replay,
}

impl fmt::Display for LlmMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LlmMode::Live => "live",
            LlmMode::Record => "record",
            LlmMode::Replay => "replay",
        })
    }
}

impl FromStr for LlmMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(LlmMode::Live),
            "record" => Ok(LlmMode::Record),
            "replay" => Ok(LlmMode::Replay),
            other => Err(format!("unknown llm mode `{other}` (live|record|replay)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CassetteRequest {
    Chat(ChatRequest),
    Embedding(EmbeddingRequest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CassetteResponse {
    Text(String),
    Vectors(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub key: String,
    pub request: CassetteRequest,
    pub response: CassetteResponse,
}

/// Recorded request/response pairs, keyed by [`canonical_key`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cassette {
    pub version: u32,
    pub entries: Vec<CassetteEntry>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Default for Cassette {
    fn default() -> Self {
        Self {
            version: CASSETTE_VERSION,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl Cassette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let mut cassette: Cassette = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cassette.version != CASSETTE_VERSION {
            return Err(format!("unsupported cassette version {}", cassette.version));
        }
        cassette.reindex();
        Ok(cassette)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("cassette serializes");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LlmError::CassetteIo {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|message| LlmError::CassetteIo {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Loads `path` if it exists, otherwise starts an empty cassette.
    pub fn load_or_new(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        if path.as_ref().exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LlmError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| LlmError::CassetteIo {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn reindex(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&CassetteEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    /// Inserts an entry, replacing any earlier one with the same key.
    pub fn insert(&mut self, entry: CassetteEntry) {
        match self.index.get(&entry.key) {
            Some(&i) => self.entries[i] = entry,
            None => {
                self.index.insert(entry.key.clone(), self.entries.len());
                self.entries.push(entry);
            }
        }
    }
}

fn canonical_json(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                canonical_json(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonical_json(v, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// SHA-256 (hex) of the request's canonical JSON form (sorted keys, no
/// insignificant whitespace).
pub fn canonical_key(request: &CassetteRequest) -> String {
    let value = serde_json::to_value(request).expect("requests serialize");
    let mut text = String::new();
    canonical_json(&value, &mut text);
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A fixed-dimension embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity; 0 when either vector is zero or dimensions differ.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        if self.dim() != other.dim() {
            return 0.0;
        }
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        (dot / denom).clamp(-1.0, 1.0)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hashed character-trigram frequency vector, L2-normalized.
///
/// The text is lowercased and wrapped in `^`/`$` boundary markers; each
/// trigram of the padded character sequence is hashed (FNV-1a over its UTF-8
/// bytes) into one of 256 buckets.
pub fn offline_embedding(text: &str) -> EmbeddingVector {
    let mut chars = vec!['^'];
    chars.extend(text.to_lowercase().chars());
    chars.push('$');
    let mut counts = vec![0.0f64; OFFLINE_EMBEDDING_DIM];
    let grams: Vec<String> = if chars.len() < 3 {
        vec![chars.iter().collect()]
    } else {
        chars.windows(3).map(|w| w.iter().collect()).collect()
    };
    for gram in grams {
        let bucket = (fnv1a(gram.as_bytes()) % OFFLINE_EMBEDDING_DIM as u64) as usize;
        counts[bucket] += 1.0;
    }
    let norm = counts.iter().map(|v| v * v).sum::<f64>().sqrt();
    EmbeddingVector(counts.into_iter().map(|v| v / norm).collect())
}

/// Something that can answer chat and embedding requests.
pub trait LlmBackend: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<String, LlmError>;
    fn embed(&self, request: &EmbeddingRequest) -> Result<Vec<Vec<f64>>, LlmError>;
}

/// OpenAI-compatible HTTP provider (`/chat/completions`, `/embeddings`).
pub struct HttpBackend {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        let config = ureq::Agent::config_builder().http_status_as_error(false).build();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            agent: config.into(),
        }
    }

    fn post(&self, endpoint: &str, body: &Value) -> Result<Value, LlmError> {
        let url = format!("{}/{endpoint}", self.base_url);
        let mut req = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = req.send_json(body).map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Status { status, body: text });
        }
        serde_json::from_str(&text).map_err(|e| LlmError::BadResponse(e.to_string()))
    }
}

impl LlmBackend for HttpBackend {
    fn chat(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "seed": request.seed,
            "messages": request.messages,
        });
        let value = self.post("chat/completions", &body)?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))
    }

    fn embed(&self, request: &EmbeddingRequest) -> Result<Vec<Vec<f64>>, LlmError> {
        let body = serde_json::json!({ "model": request.model, "input": request.texts });
        let value = self.post("embeddings", &body)?;
        let data = value["data"]
            .as_array()
            .ok_or_else(|| LlmError::BadResponse("missing data array".into()))?;
        let mut rows: Vec<(u64, Vec<f64>)> = data
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let index = item["index"].as_u64().unwrap_or(i as u64);
                let vector = item["embedding"]
                    .as_array()
                    .ok_or_else(|| LlmError::BadResponse("missing embedding".into()))?
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| LlmError::BadResponse("non-numeric embedding".into()))
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                Ok((index, vector))
            })
            .collect::<Result<_, LlmError>>()?;
        rows.sort_by_key(|(i, _)| *i);
        if rows.len() != request.texts.len() {
            return Err(LlmError::BadResponse(format!(
                "expected {} embeddings, got {}",
                request.texts.len(),
                rows.len()
            )));
        }
        Ok(rows.into_iter().map(|(_, v)| v).collect())
    }
}

/// A canned backend answering by substring match on the last user message.
/// Used for tests and for producing fixture cassettes.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    rules: Vec<(String, String)>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Answers `response` to any request whose last user message contains `needle`.
    /// Earlier rules win.
    pub fn on(mut self, needle: impl Into<String>, response: impl Into<String>) -> Self {
        self.rules.push((needle.into(), response.into()));
        self
    }
}

impl LlmBackend for ScriptedBackend {
    fn chat(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let last = request
            .messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        self.rules
            .iter()
            .find(|(needle, _)| last.contains(needle.as_str()))
            .map(|(_, response)| response.clone())
            .ok_or_else(|| LlmError::BadResponse(format!("no scripted answer for \"{}\"", request.prompt_excerpt())))
    }

    fn embed(&self, request: &EmbeddingRequest) -> Result<Vec<Vec<f64>>, LlmError> {
        Ok(request.texts.iter().map(|t| offline_embedding(t).0).collect())
    }
}

/// Model parameters applied to every request a gateway builds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub chat_model: String,
    pub embedding_model: String,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            chat_model: DEFAULT_CHAT_MODEL.into(),
            embedding_model: OFFLINE_EMBEDDING_MODEL.into(),
            temperature: 0.0,
            seed: DEFAULT_SEED,
        }
    }
}

/// Routes requests to a backend and/or a cassette according to the mode.
pub struct Gateway {
    mode: LlmMode,
    settings: ModelSettings,
    backend: Option<Box<dyn LlmBackend>>,
    cassette: Option<Mutex<Cassette>>,
    cassette_path: Option<PathBuf>,
    history: Mutex<Vec<ChatRequest>>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("mode", &self.mode)
            .field("settings", &self.settings)
            .field("cassette_path", &self.cassette_path)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    /// Live calls, nothing recorded.
    pub fn live(backend: Box<dyn LlmBackend>, settings: ModelSettings) -> Self {
        Self {
            mode: LlmMode::Live,
            settings,
            backend: Some(backend),
            cassette: None,
            cassette_path: None,
            history: Mutex::new(Vec::new()),
        }
    }

    /// Live calls appended to `cassette`; saved to `path` after every new entry
    /// when a path is given.
    pub fn record(
        backend: Box<dyn LlmBackend>,
        settings: ModelSettings,
        cassette: Cassette,
        path: Option<PathBuf>,
    ) -> Self {
        Self {
            mode: LlmMode::Record,
            settings,
            backend: Some(backend),
            cassette: Some(Mutex::new(cassette)),
            cassette_path: path,
            history: Mutex::new(Vec::new()),
        }
    }

    /// Answers only from `cassette`. Holds no backend.
    pub fn replay(cassette: Cassette, settings: ModelSettings) -> Self {
        Self {
            mode: LlmMode::Replay,
            settings,
            backend: None,
            cassette: Some(Mutex::new(cassette)),
            cassette_path: None,
            history: Mutex::new(Vec::new()),
        }
    }

    pub fn mode(&self) -> LlmMode {
        self.mode
    }

    pub fn settings(&self) -> &ModelSettings {
        &self.settings
    }

    /// A request carrying this gateway's model, temperature and seed.
    pub fn request(&self, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest {
            model: self.settings.chat_model.clone(),
            temperature: self.settings.temperature,
            seed: self.settings.seed,
            messages,
        }
    }

    /// Every chat request answered so far, in order.
    pub fn chat_history(&self) -> Vec<ChatRequest> {
        self.history.lock().expect("history lock").clone()
    }

    /// Snapshot of the cassette, if any.
    pub fn cassette(&self) -> Option<Cassette> {
        self.cassette.as_ref().map(|c| c.lock().expect("cassette lock").clone())
    }

    fn backend(&self) -> Result<&dyn LlmBackend, LlmError> {
        self.backend.as_deref().ok_or(LlmError::NoBackend)
    }

    fn lookup(&self, key: &str) -> Result<Option<CassetteResponse>, LlmError> {
        let cassette = self.cassette.as_ref().ok_or(LlmError::NoCassette { mode: self.mode })?;
        Ok(cassette
            .lock()
            .expect("cassette lock")
            .get(key)
            .map(|e| e.response.clone()))
    }

    fn append(&self, entry: CassetteEntry) -> Result<(), LlmError> {
        let cassette = self.cassette.as_ref().ok_or(LlmError::NoCassette { mode: self.mode })?;
        let mut guard = cassette.lock().expect("cassette lock");
        guard.insert(entry);
        if let Some(path) = &self.cassette_path {
            guard.save(path)?;
        }
        Ok(())
    }

    pub fn chat(&self, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        self.history.lock().expect("history lock").push(request.clone());
        let wrapped = CassetteRequest::Chat(request.clone());
        match self.mode {
            LlmMode::Live => self.backend()?.chat(request),
            LlmMode::Record => {
                let response = self.backend()?.chat(request)?;
                self.append(CassetteEntry {
                    key: canonical_key(&wrapped),
                    request: wrapped,
                    response: CassetteResponse::Text(response.clone()),
                })?;
                Ok(response)
            }
            LlmMode::Replay => {
                let key = canonical_key(&wrapped);
                match self.lookup(&key)? {
                    Some(CassetteResponse::Text(text)) => Ok(text),
                    Some(CassetteResponse::Vectors(_)) => Err(LlmError::BadResponse(format!(
                        "cassette entry {key} holds vectors, expected text"
                    ))),
                    None => Err(LlmError::CassetteMiss {
                        key,
                        prompt: request.prompt_excerpt(),
                    }),
                }
            }
        }
    }

    /// Embeds `texts` in order. The offline model is computed locally in every mode.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, LlmError> {
        if texts.is_empty() {
            return Err(LlmError::InvalidRequest("no texts to embed".into()));
        }
        if self.settings.embedding_model == OFFLINE_EMBEDDING_MODEL {
            return Ok(texts.iter().map(|t| offline_embedding(t)).collect());
        }
        let request = EmbeddingRequest {
            model: self.settings.embedding_model.clone(),
            texts: texts.to_vec(),
        };
        let wrapped = CassetteRequest::Embedding(request.clone());
        let vectors = match self.mode {
            LlmMode::Live => self.backend()?.embed(&request)?,
            LlmMode::Record => {
                let vectors = self.backend()?.embed(&request)?;
                self.append(CassetteEntry {
                    key: canonical_key(&wrapped),
                    request: wrapped,
                    response: CassetteResponse::Vectors(vectors.clone()),
                })?;
                vectors
            }
            LlmMode::Replay => {
                let key = canonical_key(&wrapped);
                match self.lookup(&key)? {
                    Some(CassetteResponse::Vectors(v)) => v,
                    Some(CassetteResponse::Text(_)) => {
                        return Err(LlmError::BadResponse(format!(
                            "cassette entry {key} holds text, expected vectors"
                        )))
                    }
                    None => {
                        return Err(LlmError::CassetteMiss {
                            key,
                            prompt: format!("embed {:?}", texts.first().map(String::as_str).unwrap_or("")),
                        })
                    }
                }
            }
        };
        if vectors.len() != texts.len() {
            return Err(LlmError::BadResponse(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                vectors.len()
            )));
        }
        Ok(vectors.into_iter().map(EmbeddingVector).collect())
    }
}
