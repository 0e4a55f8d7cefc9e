//! Mapping raw event mentions onto a stable canonical vocabulary.
//!
//! Two strategies are provided. [`canonicalize_embedding_first`] embeds the
//! unique mentions, clusters them with mini-batch k-means and asks the LLM to
//! name each cluster. [`canonicalize_incremental`] walks the mentions in
//! document order and maintains a registry, asking the LLM to adjudicate
//! borderline matches and to rename events as they accrue members.

mod embedding_first;
mod incremental;
mod kmeans;
mod registry;

use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::extraction::EventRecord;
use crate::llm::EmbeddingVector;

pub use embedding_first::{
    canonicalize_embedding_first, name_cluster, representatives, EmbeddingFirstOptions, NamingOptions,
    DEFAULT_REPRESENTATIVES,
};
pub use incremental::{
    candidates, canonicalize_incremental, parse_match, Candidate, EmbeddingCache, IncrementalOptions, MatchVerdict,
};
pub use kmeans::{minibatch_kmeans, minibatch_kmeans_with, ClusterModel, KMeansOptions};
pub use registry::{CanonicalEvent, CanonicalMap, CanonicalRegistry, CanonParams};

pub const DEFAULT_K_MAX: usize = 30;

/// Distinct non-empty mentions in first-occurrence order (documents by
/// doc_id, then position).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UniqueVocabulary {
    pub items: Vec<String>,
}

impl UniqueVocabulary {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.items.iter().position(|u| u == s)
    }
}

pub fn unique_preserve_order<L: AsRef<[S]>, S: AsRef<str>>(lists: &[L]) -> UniqueVocabulary {
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for list in lists {
        for s in list.as_ref() {
            let s = s.as_ref();
            if !s.is_empty() && seen.insert(s) {
                items.push(s.to_string());
            }
        }
    }
    UniqueVocabulary { items }
}

pub fn vocabulary_of(records: &[EventRecord]) -> UniqueVocabulary {
    let lists: Vec<&[String]> = records.iter().map(|r| r.mentions.as_slice()).collect();
    unique_preserve_order(&lists)
}

/// Scales `v` to unit length. Vectors with norm ≤ 1e-12 come back unchanged
/// with the flag set.
pub fn l2_normalize(v: &EmbeddingVector) -> (EmbeddingVector, bool) {
    let norm = v.norm();
    if norm <= 1e-12 {
        warn!("degenerate (zero) embedding left unnormalized");
        return (v.clone(), true);
    }
    (
        EmbeddingVector::new(v.as_slice().iter().map(|x| x / norm).collect()),
        false,
    )
}

/// Output of either canonicalization strategy.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub registry: CanonicalRegistry,
    /// Input records with every mention replaced by its canonical name.
    pub records: Vec<EventRecord>,
}
