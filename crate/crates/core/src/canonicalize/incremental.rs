use std::collections::HashMap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CanonicalRegistry, Canonicalization};
use crate::error::{Error, Result};
use crate::extraction::{clean_mention, EventRecord};
use crate::llm::{cosine, ChatRequest, Gateway};
use crate::prompts::{self, MatchCandidate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalOptions {
    /// Minimum cosine between a mention and an event's mean member embedding.
    pub tau: f64,
    pub top_k: usize,
    pub max_tokens: u32,
}

impl Default for IncrementalOptions {
    fn default() -> Self {
        Self {
            tau: 0.80,
            top_k: 5,
            max_tokens: 256,
        }
    }
}

/// Memoizes embeddings so each distinct string is embedded once.
pub struct EmbeddingCache<'a> {
    gw: &'a Gateway,
    map: HashMap<String, Vec<f64>>,
}

impl<'a> EmbeddingCache<'a> {
    pub fn new(gw: &'a Gateway) -> Self {
        Self {
            gw,
            map: HashMap::new(),
        }
    }

    /// Embeds every not-yet-cached text in one batched call.
    pub fn warm(&mut self, texts: &[String]) -> Result<()> {
        let mut missing: Vec<String> = texts
            .iter()
            .filter(|t| !t.is_empty() && !self.map.contains_key(*t))
            .cloned()
            .collect();
        missing.sort();
        missing.dedup();
        if missing.is_empty() {
            return Ok(());
        }
        let vecs = self.gw.embed_batch(&missing)?;
        for (t, v) in missing.into_iter().zip(vecs) {
            self.map.insert(t, v.into_inner());
        }
        Ok(())
    }

    pub fn get(&mut self, text: &str) -> Result<&[f64]> {
        if !self.map.contains_key(text) {
            self.warm(&[text.to_string()])?;
        }
        Ok(&self.map[text])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub canon_id: usize,
    pub cosine: f64,
}

/// Registered events whose mean member embedding has cosine ≥ `tau` with
/// `t`, best first (ties by canon_id), at most `top_k`.
pub fn candidates(
    reg: &CanonicalRegistry,
    t: &str,
    cache: &mut EmbeddingCache<'_>,
    opts: &IncrementalOptions,
) -> Result<Vec<Candidate>> {
    if reg.is_empty() {
        return Ok(Vec::new());
    }
    let target = cache.get(t)?.to_vec();
    let mut out = Vec::new();
    for e in reg.events() {
        let mut mean = vec![0.0; target.len()];
        for m in &e.members {
            for (acc, x) in mean.iter_mut().zip(cache.get(m)?) {
                *acc += x;
            }
        }
        let c = cosine(&target, &mean);
        if c >= opts.tau {
            out.push(Candidate {
                canon_id: e.canon_id,
                cosine: c,
            });
        }
    }
    out.sort_by(|a, b| b.cosine.total_cmp(&a.cosine).then(a.canon_id.cmp(&b.canon_id)));
    out.truncate(opts.top_k);
    Ok(out)
}

/// Parsed matcher answer: `(match, chosen event, updated name)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchVerdict {
    pub matched: bool,
    pub canon_id: Option<usize>,
    pub name: Option<String>,
}

/// Reads the first `{...}` object in `text`. Anything unparseable is a
/// non-match.
pub fn parse_match(text: &str) -> MatchVerdict {
    let (Some(start), Some(end)) = (text.find('{'), text.rfind('}')) else {
        return MatchVerdict::default();
    };
    if end < start {
        return MatchVerdict::default();
    }
    let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(&text[start..=end]) else {
        return MatchVerdict::default();
    };
    let matched = match obj.get("match") {
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) => matches!(s.to_ascii_lowercase().as_str(), "true" | "yes"),
        _ => false,
    };
    let canon_id = match obj.get("canon_id") {
        Some(Value::Number(n)) => n.as_u64().map(|v| v as usize),
        Some(Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    };
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .map(clean_mention)
        .filter(|s| !s.is_empty());
    MatchVerdict {
        matched: matched && canon_id.is_some(),
        canon_id,
        name,
    }
}

fn llm_match(
    gw: &Gateway,
    reg: &CanonicalRegistry,
    t: &str,
    shortlist: &[Candidate],
    opts: &IncrementalOptions,
) -> Result<MatchVerdict> {
    let offered: Vec<MatchCandidate<'_>> = shortlist
        .iter()
        .map(|c| {
            let e = &reg.events()[c.canon_id];
            MatchCandidate {
                canon_id: e.canon_id,
                name: &e.name,
                members: &e.members,
            }
        })
        .collect();
    let (system, user) = prompts::matcher(t, &offered);
    let req = ChatRequest::new(system, user)
        .temperature(0.0)
        .max_tokens(opts.max_tokens);
    let text = match gw.chat(&req) {
        Ok(text) => text,
        Err(Error::EmptyResponse) => String::new(),
        Err(e) => return Err(e),
    };
    let mut verdict = parse_match(&text);
    if verdict.matched && !shortlist.iter().any(|c| Some(c.canon_id) == verdict.canon_id) {
        warn!("matcher chose an event outside the shortlist; treating as no match");
        verdict.matched = false;
    }
    Ok(verdict)
}

/// Incremental, order-dependent canonicalization with LLM adjudication.
///
/// Mentions are visited in document then position order. A mention already
/// registered as a member reuses its event directly. Otherwise the shortlist
/// from [`candidates`] goes to the matcher; a match registers the occurrence
/// and may rename the event, in which case every previously rewritten
/// occurrence of that event is rewritten to the new name.
pub fn canonicalize_incremental(
    gw: &Gateway,
    records: &[EventRecord],
    opts: &IncrementalOptions,
) -> Result<Canonicalization> {
    let mut out: Vec<EventRecord> = records.to_vec();
    let index_of: HashMap<usize, usize> = records.iter().enumerate().map(|(i, r)| (r.doc_id, i)).collect();
    let mut reg = CanonicalRegistry::new();
    let mut cache = EmbeddingCache::new(gw);
    let all: Vec<String> = records
        .iter()
        .flat_map(|r| r.mentions.iter().map(|m| clean_mention(m)))
        .collect();
    cache.warm(&all)?;

    for (ri, rec) in records.iter().enumerate() {
        for (k, mention) in rec.mentions.iter().enumerate() {
            let t = clean_mention(mention);
            if t.is_empty() {
                out[ri].mentions[k] = t;
                continue;
            }
            if let Some(id) = reg.id_of(&t) {
                reg.add_occurrence(id, rec.doc_id, k);
                out[ri].mentions[k] = reg.events()[id].name.clone();
                continue;
            }

            let shortlist = candidates(&reg, &t, &mut cache, opts)?;
            let verdict = if shortlist.is_empty() {
                MatchVerdict::default()
            } else {
                llm_match(gw, &reg, &t, &shortlist, opts)?
            };

            let Some(c) = verdict.canon_id.filter(|_| verdict.matched) else {
                // new event named t, unless an event already carries that name
                let id = reg.id_by_name(&t).unwrap_or_else(|| reg.create(&t));
                reg.add_member(id, &t);
                reg.add_occurrence(id, rec.doc_id, k);
                out[ri].mentions[k] = reg.events()[id].name.clone();
                continue;
            };

            reg.add_member(c, &t);
            reg.add_occurrence(c, rec.doc_id, k);
            let current = reg.events()[c].name.clone();
            match verdict.name {
                Some(u) if u != current => {
                    if reg.id_by_name(&u).is_some() {
                        debug!("rename of event {c} to {u:?} would collide; keeping {current:?}");
                        out[ri].mentions[k] = current;
                    } else {
                        reg.rename(c, &u);
                        for &(d, pos) in &reg.events()[c].occurrences {
                            out[index_of[&d]].mentions[pos] = u.clone();
                        }
                    }
                }
                _ => out[ri].mentions[k] = current,
            }
        }
    }
    Ok(Canonicalization {
        registry: reg,
        records: out,
    })
}
