use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{
    l2_normalize, minibatch_kmeans_with, vocabulary_of, CanonicalRegistry, Canonicalization, ClusterModel,
    KMeansOptions, UniqueVocabulary, DEFAULT_K_MAX,
};
use crate::error::{Error, Result};
use crate::extraction::{clean_mention, strip_bullet, EventRecord};
use crate::llm::{bounded_map, ChatRequest, Gateway};
use crate::prompts;

pub const DEFAULT_REPRESENTATIVES: usize = 5;

const VACUOUS_NAMES: &[&str] = &[
    "other", "others", "misc", "miscellaneous", "unknown", "general", "various", "none", "n/a", "events",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamingOptions {
    pub max_words: usize,
    /// Extra attempts after an unusable name before falling back.
    pub retries: usize,
    pub max_tokens: u32,
}

impl Default for NamingOptions {
    fn default() -> Self {
        Self {
            max_words: 10,
            retries: 1,
            max_tokens: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFirstOptions {
    pub k_max: usize,
    /// Representatives shown to the namer per cluster.
    pub representatives: usize,
    pub seed: u64,
    pub kmeans: KMeansOptions,
    pub naming: NamingOptions,
}

impl Default for EmbeddingFirstOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            representatives: DEFAULT_REPRESENTATIVES,
            seed: 42,
            kmeans: KMeansOptions::default(),
            naming: NamingOptions::default(),
        }
    }
}

/// Up to `m` members of `cluster`, ranked by inner product with its centroid.
/// Ties keep vocabulary order.
pub fn representatives(
    model: &ClusterModel,
    embeddings: &[Vec<f64>],
    vocab: &UniqueVocabulary,
    cluster: usize,
    m: usize,
) -> Vec<String> {
    let centroid = &model.centroids[cluster];
    let mut scored: Vec<(usize, f64)> = model
        .members(cluster)
        .into_iter()
        .map(|i| (i, embeddings[i].iter().zip(centroid).map(|(a, b)| a * b).sum()))
        .collect();
    // stable sort keeps vocabulary order among equal scores
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored
        .into_iter()
        .take(m)
        .map(|(i, _)| vocab.items[i].clone())
        .collect()
}

fn usable_name(response: &str, max_words: usize) -> Option<String> {
    let line = response.lines().map(str::trim).find(|l| !l.is_empty())?;
    let name = clean_mention(strip_bullet(line));
    let words = name.split_whitespace().count();
    let bare = name.trim_end_matches('.').to_lowercase();
    if words == 0 || words > max_words || VACUOUS_NAMES.contains(&bare.as_str()) {
        return None;
    }
    Some(name)
}

/// Asks for one short canonical label at temperature 0. Falls back to the
/// first example after repeated unusable answers or a transport failure.
pub fn name_cluster(gw: &Gateway, examples: &[String], opts: &NamingOptions) -> Result<String> {
    let fallback = examples
        .first()
        .ok_or_else(|| Error::InvalidInput("name_cluster needs at least one example".into()))?;
    let (system, user) = prompts::naming(examples);
    let req = ChatRequest::new(system, user)
        .temperature(0.0)
        .max_tokens(opts.max_tokens);
    for _ in 0..=opts.retries {
        match gw.chat(&req) {
            Ok(text) => match usable_name(&text, opts.max_words) {
                Some(name) => return Ok(name),
                None => warn!("unusable cluster name {text:?}"),
            },
            Err(Error::EmptyResponse) => warn!("empty cluster name"),
            Err(e) => {
                warn!("naming failed ({e}); using first representative");
                break;
            }
        }
    }
    Ok(fallback.clone())
}

/// Embedding-first canonicalization: unique list, embed, normalize, cluster
/// with `K = min(k_max, M)`, name each cluster from its representatives, and
/// rewrite every list. Clusters that receive identical names are merged.
pub fn canonicalize_embedding_first(
    gw: &Gateway,
    records: &[EventRecord],
    opts: &EmbeddingFirstOptions,
) -> Result<Canonicalization> {
    let vocab = vocabulary_of(records);
    if vocab.is_empty() {
        return Err(Error::NoEvents);
    }
    if opts.k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    let embeddings: Vec<Vec<f64>> = gw
        .embed_batch(&vocab.items)?
        .iter()
        .map(|v| l2_normalize(v).0.into_inner())
        .collect();
    let k = opts.k_max.min(vocab.len());
    let model = minibatch_kmeans_with(&embeddings, k, opts.seed, &opts.kmeans)?;
    info!("clustered {} mentions into {} clusters", vocab.len(), model.k);

    let clusters: Vec<usize> = (0..model.k).collect();
    let names = bounded_map(&clusters, gw.max_parallel(), |_, &c| {
        let reps = representatives(&model, &embeddings, &vocab, c, opts.representatives);
        name_cluster(gw, &reps, &opts.naming)
    })
    .into_iter()
    .collect::<Result<Vec<String>>>()?;

    let mut registry = CanonicalRegistry::new();
    let cluster_to_canon: Vec<usize> = names
        .iter()
        .map(|name| registry.id_by_name(name).unwrap_or_else(|| registry.create(name)))
        .collect();
    for (i, u) in vocab.items.iter().enumerate() {
        registry.add_member(cluster_to_canon[model.labels[i]], u);
    }
    for r in records {
        for (pos, m) in r.mentions.iter().enumerate() {
            if let Some(id) = registry.id_of(m) {
                registry.add_occurrence(id, r.doc_id, pos);
            }
        }
    }
    let rewritten = registry.rewrite(records)?;
    Ok(Canonicalization {
        registry,
        records: rewritten,
    })
}
