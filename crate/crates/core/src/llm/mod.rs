//! Chat-completion and embedding clients.
//!
//! [`Gateway`] wraps a [`Provider`] and owns the cross-cutting behaviour:
//! call accounting, embedding chunking, bounded parallelism and dimension
//! checks. Two providers ship with the crate: [`RemoteProvider`] speaks the
//! OpenAI-compatible HTTP JSON shape, and [`MockProvider`] is a deterministic
//! offline stand-in used by tests and examples.

mod mock;
mod pool;
mod remote;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mock::{MockProvider, MockWorld};
pub use pool::bounded_map;
pub use remote::{HttpFailure, HttpTransport, RemoteProvider, UreqTransport};

pub const DEFAULT_EMBED_DIM: usize = 256;
pub const DEFAULT_EMBED_CHUNK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Remote,
    Mock,
}

impl std::str::FromStr for ProviderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "remote" => Ok(ProviderKind::Remote),
            "mock" => Ok(ProviderKind::Mock),
            other => Err(Error::InvalidConfig(format!(
                "unknown provider kind {other:?} (expected remote|mock)"
            ))),
        }
    }
}

/// Provider settings. Remote configs carry the *name* of the environment
/// variable that holds the API key, never the key itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub base_url: String,
    pub api_key_env: String,
    pub chat_model: String,
    pub embed_model: String,
    pub embed_dim: usize,
    pub embed_chunk_size: usize,
    pub max_parallel: usize,
    pub max_retries: u32,
    /// Base delay of the exponential backoff, in milliseconds.
    pub retry_base_ms: u64,
    pub timeout_secs: u64,
    pub seed: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Mock,
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            chat_model: "gpt-4o-mini".into(),
            embed_model: "text-embedding-3-large".into(),
            embed_dim: DEFAULT_EMBED_DIM,
            embed_chunk_size: DEFAULT_EMBED_CHUNK,
            max_parallel: 4,
            max_retries: 3,
            retry_base_ms: 500,
            timeout_secs: 120,
            seed: 42,
        }
    }
}

impl ProviderConfig {
    pub fn mock(seed: u64) -> Self {
        Self {
            kind: ProviderKind::Mock,
            chat_model: "mock-chat".into(),
            embed_model: "mock-embed".into(),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_parallel == 0 {
            return Err(Error::InvalidConfig("max_parallel must be >= 1".into()));
        }
        if self.embed_chunk_size == 0 {
            return Err(Error::InvalidConfig("embed_chunk_size must be >= 1".into()));
        }
        match self.kind {
            ProviderKind::Mock if self.embed_dim == 0 => {
                Err(Error::InvalidConfig("embed_dim must be >= 1".into()))
            }
            ProviderKind::Remote if self.base_url.trim().is_empty() => {
                Err(Error::InvalidConfig("remote provider needs base_url".into()))
            }
            ProviderKind::Remote if self.api_key_env.trim().is_empty() => {
                Err(Error::InvalidConfig("remote provider needs api_key_env".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Sampling seed forwarded to the provider. Repeated samples of the same
    /// prompt differ only through this value.
    pub seed: Option<u64>,
}

impl ChatRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            user: user.into(),
            temperature: 0.0,
            max_tokens: 1024,
            seed: None,
        }
    }

    pub fn temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn max_tokens(mut self, n: u32) -> Self {
        self.max_tokens = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::InvalidInput(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(Error::InvalidInput("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity; zero when either vector is zero.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        cosine(&self.values, &other.values)
    }
}

pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na <= 1e-12 || nb <= 1e-12 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// A single upstream service. Implementations handle their own transport
/// retries; `embed` corresponds to exactly one upstream request.
pub trait Provider: Send + Sync {
    fn chat(&self, req: &ChatRequest) -> Result<String>;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;

    fn chat_model(&self) -> &str;
}

/// Shareable client used by every pipeline stage.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<GatewayInner>,
}

struct GatewayInner {
    provider: Box<dyn Provider>,
    max_parallel: usize,
    chunk_size: usize,
    chat_calls: AtomicUsize,
    embed_calls: AtomicUsize,
    dim: OnceLock<usize>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("model", &self.inner.provider.chat_model())
            .field("max_parallel", &self.inner.max_parallel)
            .field("chunk_size", &self.inner.chunk_size)
            .finish()
    }
}

impl Gateway {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self> {
        cfg.validate()?;
        let provider: Box<dyn Provider> = match cfg.kind {
            ProviderKind::Mock => Box::new(MockProvider::new(cfg)),
            ProviderKind::Remote => Box::new(RemoteProvider::from_env(cfg, UreqTransport::new(cfg))?),
        };
        Ok(Self::with_provider(provider, cfg.max_parallel, cfg.embed_chunk_size))
    }

    pub fn with_provider(provider: Box<dyn Provider>, max_parallel: usize, chunk_size: usize) -> Self {
        Self {
            inner: Arc::new(GatewayInner {
                provider,
                max_parallel: max_parallel.max(1),
                chunk_size: chunk_size.max(1),
                chat_calls: AtomicUsize::new(0),
                embed_calls: AtomicUsize::new(0),
                dim: OnceLock::new(),
            }),
        }
    }

    pub fn chat_model(&self) -> &str {
        self.inner.provider.chat_model()
    }

    pub fn max_parallel(&self) -> usize {
        self.inner.max_parallel
    }

    pub fn chat_calls(&self) -> usize {
        self.inner.chat_calls.load(Ordering::SeqCst)
    }

    pub fn embed_calls(&self) -> usize {
        self.inner.embed_calls.load(Ordering::SeqCst)
    }

    pub fn upstream_calls(&self) -> usize {
        self.chat_calls() + self.embed_calls()
    }

    pub fn chat(&self, req: &ChatRequest) -> Result<String> {
        req.validate()?;
        self.inner.chat_calls.fetch_add(1, Ordering::SeqCst);
        let text = self.inner.provider.chat(req)?;
        if text.trim().is_empty() {
            return Err(Error::EmptyResponse);
        }
        Ok(text)
    }

    /// Embeds `texts`, preserving order. Requests are chunked and at most
    /// `max_parallel` chunks are in flight at once.
    pub fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Err(Error::InvalidInput("embed_batch needs at least one text".into()));
        }
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(Error::InvalidInput(format!("text {i} is empty")));
        }
        let chunks: Vec<&[String]> = texts.chunks(self.inner.chunk_size).collect();
        let results = bounded_map(&chunks, self.inner.max_parallel, |_, chunk| {
            self.inner.embed_calls.fetch_add(1, Ordering::SeqCst);
            let vecs = self.inner.provider.embed(chunk)?;
            if vecs.len() != chunk.len() {
                return Err(Error::Transport {
                    attempts: 1,
                    message: format!("expected {} embeddings, got {}", chunk.len(), vecs.len()),
                });
            }
            Ok(vecs)
        });

        let mut out = Vec::with_capacity(texts.len());
        for chunk in results {
            for v in chunk? {
                let expected = *self.inner.dim.get_or_init(|| v.len());
                if v.len() != expected || v.is_empty() {
                    return Err(Error::DimMismatch {
                        expected,
                        got: v.len(),
                    });
                }
                out.push(EmbeddingVector::new(v));
            }
        }
        Ok(out)
    }
}
