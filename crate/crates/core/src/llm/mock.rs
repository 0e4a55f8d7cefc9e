//! Deterministic offline provider.
//!
//! Chat answers are a pure function of `(seed, system, user, request seed)`.
//! The provider recognises the pipeline's own prompt roles and fabricates
//! plausible answers for each: narrative documents sampled from a small
//! noisy-OR scenario world, event lists in varying list syntaxes, cluster
//! names that echo the first example, and JSON match verdicts.
//!
//! Embeddings are bags of hashed character trigrams, L2-normalized, so equal
//! strings embed identically and near-duplicates land close together.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{ChatRequest, Provider, ProviderConfig};
use crate::error::Result;
use crate::prompts::{self, PromptKind};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

fn hash_parts(parts: &[&[u8]]) -> u64 {
    parts.iter().fold(FNV_OFFSET, |h, p| {
        let h = fnv1a(h, &(p.len() as u64).to_le_bytes());
        fnv1a(h, p)
    })
}

fn trigrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Hashed character-trigram embedding, L2-normalized.
pub(crate) fn trigram_embedding(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for g in trigrams(text) {
        let bucket = (fnv1a(FNV_OFFSET, g.as_bytes()) % dim as u64) as usize;
        v[bucket] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn trigram_jaccard(a: &str, b: &str) -> f64 {
    let sa: HashSet<String> = trigrams(a).into_iter().collect();
    let sb: HashSet<String> = trigrams(b).into_iter().collect();
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    if union == 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// One latent event of the scenario world.
#[derive(Debug, Clone)]
pub struct MockConcept {
    pub phrasings: Vec<String>,
    /// `(parent index, activation strength)` pairs of the noisy-OR.
    pub parents: Vec<(usize, f64)>,
    pub leak: f64,
}

/// A small causal world over binary events, topologically ordered.
#[derive(Debug, Clone)]
pub struct MockWorld {
    pub concepts: Vec<MockConcept>,
    /// Surface modifiers appended to phrasings to create raw-string variety.
    pub modifiers: Vec<String>,
}

impl Default for MockWorld {
    fn default() -> Self {
        fn c(phrasings: &[&str], parents: &[(usize, f64)], leak: f64) -> MockConcept {
            MockConcept {
                phrasings: phrasings.iter().map(|s| s.to_string()).collect(),
                parents: parents.to_vec(),
                leak,
            }
        }
        let concepts = vec![
            c(
                &[
                    "U.S. imposes broad tariffs on Japanese imports",
                    "U.S. imposes broad tariffs on imports from Japan",
                    "Washington imposes broad tariffs on Japanese imports",
                ],
                &[],
                0.55,
            ),
            c(
                &[
                    "Japanese auto exports to the U.S. decline",
                    "Japanese auto exports to the U.S. fall sharply",
                    "Japan's auto exports to the U.S. decline",
                ],
                &[(0, 0.7)],
                0.1,
            ),
            c(
                &[
                    "The yen weakens against the dollar",
                    "The yen weakens sharply against the dollar",
                    "Yen weakens against the U.S. dollar",
                ],
                &[(0, 0.5)],
                0.15,
            ),
            c(
                &[
                    "Bank of Japan intervenes to support the yen",
                    "The Bank of Japan intervenes to prop up the yen",
                    "BoJ intervenes in currency markets to support the yen",
                ],
                &[(2, 0.7)],
                0.05,
            ),
            c(
                &[
                    "Japan negotiates tariff exemptions through investment pledges",
                    "Japan negotiates tariff exemptions via investment pledges",
                    "Tokyo negotiates tariff exemptions through investment pledges",
                ],
                &[(0, 0.5), (1, 0.4)],
                0.05,
            ),
            c(
                &[
                    "Japanese firms expand direct investment in U.S. plants",
                    "Japanese companies expand direct investment in U.S. factories",
                    "Japanese firms expand FDI in U.S. plants",
                ],
                &[(4, 0.6)],
                0.1,
            ),
            c(
                &[
                    "U.S. tightens export controls on chips to China",
                    "Washington tightens chip export controls on China",
                    "U.S. tightens semiconductor export controls on China",
                ],
                &[],
                0.45,
            ),
            c(
                &[
                    "Japan aligns semiconductor supply chains with U.S. rules",
                    "Japan aligns its semiconductor supply chain with U.S. rules",
                    "Japanese chipmakers align supply chains with U.S. rules",
                ],
                &[(6, 0.7)],
                0.1,
            ),
            c(
                &[
                    "Central banks increase gold purchases",
                    "Central banks step up gold purchases",
                    "Central banks increase their gold buying",
                ],
                &[],
                0.4,
            ),
            c(
                &[
                    "Gold prices climb to record highs",
                    "Gold prices rise to record highs",
                    "Gold climbs to record highs",
                ],
                &[(8, 0.7), (2, 0.2)],
                0.1,
            ),
        ];
        let modifiers = ["", " in 2026", " by late 2026", " after 2026"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self {
            concepts,
            modifiers,
        }
    }
}

const FILLER: &[&str] = &[
    "This document analyzes the topic from an economic and political perspective.",
    "Several mechanisms interact over the period ahead.",
    "Outcomes remain uncertain and depend on policy choices on both sides.",
    "The analysis below focuses on concrete developments and their consequences.",
];

const CONNECTIVES: &[&str] = &[
    "",
    "In this scenario, ",
    "As a result, ",
    "Meanwhile, ",
    "Analysts expect that ",
];

impl MockWorld {
    /// Samples which concepts are active, in topological order.
    pub fn sample_states(&self, rng: &mut impl Rng) -> Vec<bool> {
        let mut on = vec![false; self.concepts.len()];
        for (i, c) in self.concepts.iter().enumerate() {
            let mut off = 1.0 - c.leak;
            for &(p, strength) in &c.parents {
                if on[p] {
                    off *= 1.0 - strength;
                }
            }
            on[i] = rng.random::<f64>() < 1.0 - off;
        }
        on
    }

    fn document(&self, topic_line: &str, rng: &mut impl Rng) -> String {
        let states = self.sample_states(rng);
        let mut lines = vec![format!("Analysis: {topic_line}"), FILLER[0].to_string()];
        let mut events: Vec<String> = states
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(i, _)| {
                let c = &self.concepts[i];
                let phrase = &c.phrasings[rng.random_range(0..c.phrasings.len())];
                let modifier = &self.modifiers[rng.random_range(0..self.modifiers.len())];
                format!("{phrase}{modifier}")
            })
            .collect();
        events.shuffle(rng);
        for (k, e) in events.iter().enumerate() {
            let conn = CONNECTIVES[rng.random_range(0..CONNECTIVES.len())];
            lines.push(format!("{conn}{e}."));
            if k == events.len() / 2 {
                lines.push(FILLER[1 + rng.random_range(0..FILLER.len() - 1)].to_string());
            }
        }
        if let Some(first) = events.first() {
            if rng.random_bool(0.3) {
                lines.push(format!("In short, {first}."));
            }
        }
        lines.push(FILLER[2].to_string());
        lines.join("\n")
    }
}

fn extract_from_document(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let line = line.trim();
        if line.is_empty() || FILLER.contains(&line) {
            continue;
        }
        let mut body = line.trim_end_matches('.');
        for conn in CONNECTIVES.iter().chain(std::iter::once(&"In short, ")) {
            if !conn.is_empty() {
                if let Some(rest) = body.strip_prefix(conn) {
                    body = rest;
                    break;
                }
            }
        }
        out.push(body.to_string());
    }
    out
}

fn format_list(items: &[String], style: u64) -> String {
    match style % 3 {
        0 => serde_json::to_string(items).expect("strings serialize"),
        1 => {
            let quoted: Vec<String> = items
                .iter()
                .map(|s| format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")))
                .collect();
            format!("[{}]", quoted.join(", "))
        }
        _ => items.iter().map(|s| format!("- {s}\n")).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct MockProvider {
    seed: u64,
    dim: usize,
    model: String,
    world: MockWorld,
}

impl MockProvider {
    pub fn new(cfg: &ProviderConfig) -> Self {
        Self::with_world(cfg, MockWorld::default())
    }

    pub fn with_world(cfg: &ProviderConfig, world: MockWorld) -> Self {
        Self {
            seed: cfg.seed,
            dim: cfg.embed_dim.max(1),
            model: cfg.chat_model.clone(),
            world,
        }
    }

    pub fn world(&self) -> &MockWorld {
        &self.world
    }

    fn request_hash(&self, req: &ChatRequest) -> u64 {
        let sample = req.seed.map(u64::to_le_bytes).unwrap_or([0xff; 8]);
        hash_parts(&[
            &self.seed.to_le_bytes(),
            req.system.as_bytes(),
            req.user.as_bytes(),
            &sample,
        ])
    }

    fn answer_match(user: &str) -> String {
        let mention = user
            .lines()
            .find_map(|l| l.strip_prefix(prompts::MATCHER_MENTION_LABEL))
            .unwrap_or_default();
        let mut best: Option<(f64, usize, String)> = None;
        for line in user.lines() {
            let Some(rest) = line.strip_prefix('[') else { continue };
            let Some((id, rest)) = rest.split_once("] ") else { continue };
            let Ok(id) = id.parse::<usize>() else { continue };
            let (name, members) = rest.split_once(" | members: ").unwrap_or((rest, ""));
            let score = std::iter::once(name)
                .chain(members.split("; ").filter(|m| !m.is_empty()))
                .map(|s| trigram_jaccard(mention, s))
                .fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, id, name.to_string()));
            }
        }
        match best {
            Some((score, id, name)) if score >= 0.5 => {
                json!({"match": true, "canon_id": id, "name": name}).to_string()
            }
            _ => json!({"match": false, "canon_id": null, "name": ""}).to_string(),
        }
    }
}

impl Provider for MockProvider {
    fn chat(&self, req: &ChatRequest) -> Result<String> {
        let h = self.request_hash(req);
        let text = match PromptKind::detect(&req.system) {
            PromptKind::Generation => {
                let topic = req
                    .user
                    .split_once(": ")
                    .map(|(_, t)| t.trim().trim_end_matches('.').trim_matches('"'))
                    .unwrap_or(&req.user);
                let mut rng = ChaCha8Rng::seed_from_u64(h);
                self.world.document(topic, &mut rng)
            }
            PromptKind::Extraction => {
                let text = req.user.split_once('\n').map_or("", |(_, t)| t);
                format_list(&extract_from_document(text), h)
            }
            PromptKind::Naming => req
                .user
                .lines()
                .find_map(|l| l.strip_prefix("- "))
                .unwrap_or("unnamed event")
                .to_string(),
            PromptKind::Matcher => Self::answer_match(&req.user),
            PromptKind::Other => format!("mock response {h:016x}"),
        };
        Ok(text)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts
            .iter()
            .map(|t| trigram_embedding(t, self.dim))
            .collect())
    }

    fn chat_model(&self) -> &str {
        &self.model
    }
}
