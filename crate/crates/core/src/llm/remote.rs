use std::time::Duration;

use log::{debug, warn};
use rand::Rng;
use serde_json::{json, Value};

use super::{ChatRequest, Provider, ProviderConfig};
use crate::error::{Error, Result};

/// Failure modes of a single HTTP exchange.
#[derive(Debug, Clone, PartialEq)]
pub enum HttpFailure {
    Status { code: u16, body: String },
    Timeout,
    Other(String),
}

impl HttpFailure {
    fn is_transient(&self) -> bool {
        match self {
            HttpFailure::Status { code, .. } => *code == 429 || (500..600).contains(code),
            HttpFailure::Timeout => true,
            HttpFailure::Other(_) => false,
        }
    }
}

impl std::fmt::Display for HttpFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HttpFailure::Status { code, body } => write!(f, "HTTP {code}: {body}"),
            HttpFailure::Timeout => f.write_str("request timed out"),
            HttpFailure::Other(msg) => f.write_str(msg),
        }
    }
}

/// One JSON POST. Swappable so retry behaviour can be tested without a network.
pub trait HttpTransport: Send + Sync {
    fn post_json(&self, url: &str, bearer: &str, body: &Value) -> Result<Value, HttpFailure>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(cfg: &ProviderConfig) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl HttpTransport for UreqTransport {
    fn post_json(&self, url: &str, bearer: &str, body: &Value) -> Result<Value, HttpFailure> {
        let resp = self
            .agent
            .post(url)
            .header("Authorization", &format!("Bearer {bearer}"))
            .send_json(body);
        let mut resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(HttpFailure::Timeout),
            Err(e) => return Err(HttpFailure::Other(e.to_string())),
        };
        let code = resp.status().as_u16();
        if !(200..300).contains(&code) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(HttpFailure::Status { code, body });
        }
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => HttpFailure::Timeout,
                other => HttpFailure::Other(other.to_string()),
            })
    }
}

struct ApiKey(String);

impl std::fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

/// OpenAI-compatible `/chat/completions` and `/embeddings` client.
pub struct RemoteProvider<T> {
    transport: T,
    key: ApiKey,
    base_url: String,
    chat_model: String,
    embed_model: String,
    max_retries: u32,
    retry_base: Duration,
}

impl<T> std::fmt::Debug for RemoteProvider<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteProvider")
            .field("base_url", &self.base_url)
            .field("chat_model", &self.chat_model)
            .field("embed_model", &self.embed_model)
            .field("key", &self.key)
            .finish()
    }
}

impl<T: HttpTransport> RemoteProvider<T> {
    /// Resolves the API key from the environment variable named in `cfg`.
    pub fn from_env(cfg: &ProviderConfig, transport: T) -> Result<Self> {
        let key = std::env::var(&cfg.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| {
                Error::Auth(format!("environment variable {} is unset or empty", cfg.api_key_env))
            })?;
        Ok(Self::with_key(cfg, transport, key))
    }

    pub fn with_key(cfg: &ProviderConfig, transport: T, key: String) -> Self {
        Self {
            transport,
            key: ApiKey(key),
            base_url: cfg.base_url.trim_end_matches('/').to_string(),
            chat_model: cfg.chat_model.clone(),
            embed_model: cfg.embed_model.clone(),
            max_retries: cfg.max_retries,
            retry_base: Duration::from_millis(cfg.retry_base_ms),
        }
    }

    fn post_with_retry(&self, endpoint: &str, body: &Value) -> Result<Value> {
        let url = format!("{}/{}", self.base_url, endpoint);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            match self.transport.post_json(&url, &self.key.0, body) {
                Ok(v) => return Ok(v),
                Err(HttpFailure::Status { code: 401 | 403, body }) => {
                    return Err(Error::Auth(format!("provider rejected the API key: {body}")))
                }
                Err(f) if f.is_transient() && attempt <= self.max_retries => {
                    // full jitter: uniform in [0, base * 2^(attempt-1)]
                    let cap = self.retry_base.saturating_mul(1u32 << (attempt - 1).min(16));
                    let delay = cap.mul_f64(rand::rng().random::<f64>());
                    warn!("{endpoint}: {f}; retrying in {delay:?} (attempt {attempt})");
                    std::thread::sleep(delay);
                }
                Err(f) => {
                    return Err(Error::Transport {
                        attempts: attempt,
                        message: f.to_string(),
                    })
                }
            }
        }
    }
}

fn malformed(what: &str, v: &Value) -> Error {
    let mut shown = v.to_string();
    shown.truncate(200);
    Error::Transport {
        attempts: 1,
        message: format!("malformed {what} response: {shown}"),
    }
}

impl<T: HttpTransport> Provider for RemoteProvider<T> {
    fn chat(&self, req: &ChatRequest) -> Result<String> {
        let mut body = json!({
            "model": self.chat_model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        let resp = self.post_with_retry("chat/completions", &body)?;
        debug!("chat completion received");
        match resp.pointer("/choices/0/message/content") {
            Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
            Some(Value::String(_)) | Some(Value::Null) | None if resp.get("choices").is_some() => {
                Err(Error::EmptyResponse)
            }
            _ => Err(malformed("chat", &resp)),
        }
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let body = json!({ "model": self.embed_model, "input": texts });
        let resp = self.post_with_retry("embeddings", &body)?;
        let data = resp
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("embeddings", &resp))?;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item
                .get("index")
                .and_then(Value::as_u64)
                .map_or(pos, |i| i as usize);
            let emb = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("embeddings", item))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| malformed("embeddings", x)))
                .collect::<Result<Vec<f64>>>()?;
            rows.push((index, emb));
        }
        rows.sort_by_key(|(i, _)| *i);
        Ok(rows.into_iter().map(|(_, v)| v).collect())
    }

    fn chat_model(&self) -> &str {
        &self.chat_model
    }
}
