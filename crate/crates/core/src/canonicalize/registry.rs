use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::EventRecord;
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalEvent {
    pub canon_id: usize,
    pub name: String,
    /// Raw mention strings mapped here, in first-seen order.
    pub members: Vec<String>,
    /// `(doc_id, position)` pairs, sorted.
    pub occurrences: Vec<(usize, usize)>,
}

/// The canonicalization map: raw mention → canonical event, plus the
/// occurrence bookkeeping needed to rewrite event lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CanonicalRegistry {
    events: Vec<CanonicalEvent>,
    map: BTreeMap<String, usize>,
}

impl CanonicalRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[CanonicalEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event(&self, canon_id: usize) -> Option<&CanonicalEvent> {
        self.events.get(canon_id)
    }

    pub fn id_of(&self, raw: &str) -> Option<usize> {
        self.map.get(raw).copied()
    }

    pub fn name_of(&self, raw: &str) -> Option<&str> {
        self.id_of(raw).map(|id| self.events[id].name.as_str())
    }

    pub fn id_by_name(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    pub(crate) fn create(&mut self, name: &str) -> usize {
        let canon_id = self.events.len();
        self.events.push(CanonicalEvent {
            canon_id,
            name: name.to_string(),
            members: Vec::new(),
            occurrences: Vec::new(),
        });
        canon_id
    }

    pub(crate) fn add_member(&mut self, canon_id: usize, raw: &str) {
        if self.map.insert(raw.to_string(), canon_id).is_none() {
            self.events[canon_id].members.push(raw.to_string());
        }
    }

    pub(crate) fn add_occurrence(&mut self, canon_id: usize, doc_id: usize, position: usize) {
        let occ = &mut self.events[canon_id].occurrences;
        if let Err(at) = occ.binary_search(&(doc_id, position)) {
            occ.insert(at, (doc_id, position));
        }
    }

    pub(crate) fn rename(&mut self, canon_id: usize, name: &str) {
        self.events[canon_id].name = name.to_string();
    }

    /// Applies the map elementwise. Empty strings stay empty, and a string
    /// that is already a canonical name (but not a raw member) is kept, so
    /// rewriting canonical lists is the identity. Anything else unmapped is
    /// an error.
    pub fn rewrite(&self, records: &[EventRecord]) -> Result<Vec<EventRecord>> {
        records
            .iter()
            .map(|r| {
                let mentions = r
                    .mentions
                    .iter()
                    .map(|m| {
                        if m.is_empty() {
                            Ok(String::new())
                        } else {
                            self.name_of(m)
                                .or_else(|| self.id_by_name(m).map(|_| m.as_str()))
                                .map(str::to_string)
                                .ok_or_else(|| Error::UnknownMention(m.clone()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(EventRecord {
                    doc_id: r.doc_id,
                    mentions,
                })
            })
            .collect()
    }

    /// Positions in `records` whose text differs from the name of the event
    /// owning that occurrence. Empty after any correct rewrite.
    pub fn stale_positions(&self, records: &[EventRecord]) -> Vec<(usize, usize)> {
        let by_doc: HashMap<usize, &EventRecord> = records.iter().map(|r| (r.doc_id, r)).collect();
        let mut stale = Vec::new();
        for e in &self.events {
            for &(d, p) in &e.occurrences {
                let ok = by_doc
                    .get(&d)
                    .and_then(|r| r.mentions.get(p))
                    .is_some_and(|m| *m == e.name);
                if !ok {
                    stale.push((d, p));
                }
            }
        }
        stale
    }

    /// Checks the structural invariants: non-empty names and members,
    /// distinct names, a consistent map, and disjoint occurrence sets.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("canonical registry: {msg}")));
        let mut names = HashSet::new();
        let mut occ = HashSet::new();
        for (i, e) in self.events.iter().enumerate() {
            if e.canon_id != i {
                return bad(format!("event at index {i} has canon_id {}", e.canon_id));
            }
            if e.name.is_empty() || e.members.is_empty() {
                return bad(format!("event {i} has an empty name or no members"));
            }
            if !names.insert(e.name.as_str()) {
                return bad(format!("duplicate name {:?}", e.name));
            }
            for m in &e.members {
                if self.map.get(m) != Some(&i) {
                    return bad(format!("member {m:?} of event {i} is not mapped to it"));
                }
            }
            for o in &e.occurrences {
                if !occ.insert(*o) {
                    return bad(format!("occurrence {o:?} belongs to two events"));
                }
            }
        }
        for (raw, &id) in &self.map {
            if id >= self.events.len() {
                return bad(format!("{raw:?} maps to missing event {id}"));
            }
        }
        Ok(())
    }

    /// Rebuilds a registry from serialized events, validating it.
    pub fn from_events(events: Vec<CanonicalEvent>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in &events {
            for m in &e.members {
                if map.insert(m.clone(), e.canon_id).is_some() {
                    return Err(Error::InvalidInput(format!("raw mention {m:?} mapped twice")));
                }
            }
        }
        let mut reg = Self { events, map };
        for e in &mut reg.events {
            e.occurrences.sort_unstable();
        }
        reg.validate()?;
        Ok(reg)
    }

    /// Composes `self` (raw → intermediate names) with `outer`, whose members
    /// are `self`'s canonical names. Occurrences are taken from `outer`.
    pub fn compose(&self, outer: &CanonicalRegistry) -> Result<CanonicalRegistry> {
        let mut out = CanonicalRegistry::new();
        for e in outer.events() {
            let id = out.create(&e.name);
            out.events[id].occurrences = e.occurrences.clone();
        }
        for inner in &self.events {
            let id = outer
                .id_of(&inner.name)
                .ok_or_else(|| Error::UnknownMention(inner.name.clone()))?;
            for m in &inner.members {
                out.add_member(id, m);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonParams {
    pub k_max: usize,
    pub tau: f64,
    pub seed: u64,
    pub method: String,
}

/// On-disk form of `canonical_map.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMap {
    pub events: Vec<CanonicalEvent>,
    pub params: CanonParams,
}

impl CanonicalMap {
    pub fn new(registry: &CanonicalRegistry, params: CanonParams) -> Self {
        Self {
            events: registry.events().to_vec(),
            params,
        }
    }

    pub fn registry(&self) -> Result<CanonicalRegistry> {
        CanonicalRegistry::from_events(self.events.clone())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        jsonl::write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::artifact(path, e))
    }
}
