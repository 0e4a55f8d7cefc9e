use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Stage;
use crate::canonicalize::{EmbeddingFirstOptions, IncrementalOptions, NamingOptions, DEFAULT_K_MAX};
use crate::corpus::GenerationOptions;
use crate::discovery::{CiStatistic, IcaOptions, LingamOptions, ScoreKind, DEFAULT_MAX_COND, DEFAULT_PRUNE};
use crate::error::{Error, Result};
use crate::extraction::ExtractionOptions;
use crate::llm::{ProviderConfig, ProviderKind};
use crate::prompts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreChoice {
    #[default]
    Bic,
    Bdeu,
}

/// Every run setting. The TOML config file uses these field names as flat
/// keys; CLI flags override file values, which override these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topic: Option<String>,
    pub out: PathBuf,
    /// Documents per topic.
    pub n: usize,
    pub k_max: usize,
    /// Cluster representatives shown to the namer.
    pub representatives: usize,
    /// Also run the incremental registry over the cluster names.
    pub refine: bool,
    pub tau: f64,
    pub top_k: usize,
    pub alpha: f64,
    pub max_cond: usize,
    pub ci_test: CiStatistic,
    pub score: ScoreChoice,
    pub bdeu_ess: f64,
    pub prune: f64,
    pub seed: u64,
    pub temperature: f64,
    pub max_tokens: u32,
    pub time_anchor: String,
    pub provider: ProviderKind,
    pub base_url: Option<String>,
    pub api_key_env: Option<String>,
    pub chat_model: Option<String>,
    pub embed_model: Option<String>,
    pub embed_dim: Option<usize>,
    pub max_parallel: Option<usize>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let gen = GenerationOptions::default();
        Self {
            topic: None,
            out: PathBuf::from("runs"),
            n: 100,
            k_max: DEFAULT_K_MAX,
            representatives: crate::canonicalize::DEFAULT_REPRESENTATIVES,
            refine: false,
            tau: IncrementalOptions::default().tau,
            top_k: IncrementalOptions::default().top_k,
            alpha: 0.1,
            max_cond: DEFAULT_MAX_COND,
            ci_test: CiStatistic::GSquared,
            score: ScoreChoice::Bic,
            bdeu_ess: 1.0,
            prune: DEFAULT_PRUNE,
            seed: 42,
            temperature: gen.temperature,
            max_tokens: gen.max_tokens,
            time_anchor: prompts::DEFAULT_TIME_ANCHOR.to_string(),
            provider: ProviderKind::Mock,
            base_url: None,
            api_key_env: None,
            chat_model: None,
            embed_model: None,
            embed_dim: None,
            max_parallel: None,
            max_retries: None,
            timeout_secs: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.k_max == 0 {
            return bad("k_max must be >= 1".into());
        }
        if self.representatives == 0 {
            return bad("representatives must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if !(-1.0..=1.0).contains(&self.tau) {
            return bad(format!("tau must be in [-1, 1], got {}", self.tau));
        }
        if self.top_k == 0 {
            return bad("top_k must be >= 1".into());
        }
        if self.bdeu_ess.is_nan() || self.bdeu_ess <= 0.0 {
            return bad("bdeu_ess must be positive".into());
        }
        if self.prune.is_nan() || self.prune < 0.0 {
            return bad("prune must be non-negative".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad(format!("temperature must be in [0, 2], got {}", self.temperature));
        }
        self.provider_config().validate()
    }

    pub fn provider_config(&self) -> ProviderConfig {
        let base = match self.provider {
            ProviderKind::Mock => ProviderConfig::mock(self.seed),
            ProviderKind::Remote => ProviderConfig {
                kind: ProviderKind::Remote,
                seed: self.seed,
                ..ProviderConfig::default()
            },
        };
        ProviderConfig {
            base_url: self.base_url.clone().unwrap_or(base.base_url),
            api_key_env: self.api_key_env.clone().unwrap_or(base.api_key_env),
            chat_model: self.chat_model.clone().unwrap_or(base.chat_model),
            embed_model: self.embed_model.clone().unwrap_or(base.embed_model),
            embed_dim: self.embed_dim.unwrap_or(base.embed_dim),
            max_parallel: self.max_parallel.unwrap_or(base.max_parallel),
            max_retries: self.max_retries.unwrap_or(base.max_retries),
            timeout_secs: self.timeout_secs.unwrap_or(base.timeout_secs),
            ..base
        }
    }

    pub fn generation_options(&self) -> GenerationOptions {
        GenerationOptions {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            time_anchor: self.time_anchor.clone(),
        }
    }

    pub fn extraction_options(&self) -> ExtractionOptions {
        ExtractionOptions::default()
    }

    pub fn embedding_first_options(&self) -> EmbeddingFirstOptions {
        EmbeddingFirstOptions {
            k_max: self.k_max,
            representatives: self.representatives,
            seed: self.seed,
            naming: NamingOptions::default(),
            ..EmbeddingFirstOptions::default()
        }
    }

    pub fn incremental_options(&self) -> IncrementalOptions {
        IncrementalOptions {
            tau: self.tau,
            top_k: self.top_k,
            ..IncrementalOptions::default()
        }
    }

    pub fn score_kind(&self) -> ScoreKind {
        match self.score {
            ScoreChoice::Bic => ScoreKind::BicMultinomial,
            ScoreChoice::Bdeu => ScoreKind::Bdeu {
                equivalent_sample_size: self.bdeu_ess,
            },
        }
    }

    pub fn score_label(&self) -> String {
        match self.score {
            ScoreChoice::Bic => "BIC".into(),
            ScoreChoice::Bdeu => format!("BDeu, ess = {}", self.bdeu_ess),
        }
    }

    pub fn lingam_options(&self) -> LingamOptions {
        LingamOptions { prune: self.prune }
    }

    pub fn ica_options(&self) -> IcaOptions {
        IcaOptions {
            seed: self.seed,
            prune: self.prune,
            ..IcaOptions::default()
        }
    }

    pub fn canon_method(&self) -> &'static str {
        if self.refine {
            "embedding_first+incremental"
        } else {
            "embedding_first"
        }
    }

    /// The settings a stage's output depends on; a change forces a re-run.
    pub fn stage_params(&self, stage: Stage) -> serde_json::Value {
        let p = self.provider_config();
        match stage {
            Stage::Generate => json!({
                "topic": self.topic, "n": self.n, "seed": self.seed, "provider": p.kind,
                "chat_model": p.chat_model, "temperature": self.temperature,
                "max_tokens": self.max_tokens, "time_anchor": self.time_anchor,
            }),
            Stage::Extract => json!({
                "seed": self.seed, "provider": p.kind, "chat_model": p.chat_model,
            }),
            Stage::Canonicalize => json!({
                "k_max": self.k_max, "representatives": self.representatives, "seed": self.seed,
                "refine": self.refine, "tau": self.tau, "top_k": self.top_k, "provider": p.kind,
                "chat_model": p.chat_model, "embed_model": p.embed_model, "embed_dim": p.embed_dim,
            }),
            Stage::Matrix => json!({}),
            Stage::Discover => json!({
                "alpha": self.alpha, "max_cond": self.max_cond, "ci_test": self.ci_test,
                "score": self.score, "bdeu_ess": self.bdeu_ess, "prune": self.prune,
            }),
        }
    }
}
