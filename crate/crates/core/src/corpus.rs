//! Topic-conditioned document sampling and the `documents.jsonl` store.

use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::llm::{bounded_map, ChatRequest, Gateway};
use crate::prompts;

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
const MAX_SLUG_LEN: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub text: String,
    pub slug: String,
}

impl Topic {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("topic text is empty".into()));
        }
        let slug = slugify(&text);
        Ok(Self { text, slug })
    }
}

/// Lowercase, hyphenated, `[a-z0-9-]+`, at most 80 bytes.
pub fn slugify(text: &str) -> String {
    let mut slug = String::new();
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() {
            slug.push(ch.to_ascii_lowercase());
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    slug.truncate(MAX_SLUG_LEN);
    let slug = slug.trim_end_matches('-').to_string();
    if slug.is_empty() {
        // non-ASCII topics: fall back to a stable digest
        format!("topic-{}", &prompts::fingerprint(text, "")[..12])
    } else {
        slug
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: usize,
    pub topic_slug: String,
    pub text: String,
    pub model: String,
    pub created_at: DateTime<Utc>,
    pub prompt_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationOptions {
    pub temperature: f64,
    pub max_tokens: u32,
    pub time_anchor: String,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            max_tokens: 4096,
            time_anchor: prompts::DEFAULT_TIME_ANCHOR.to_string(),
        }
    }
}

pub fn documents_path(run_dir: &Path) -> PathBuf {
    run_dir.join(DOCUMENTS_FILE)
}

/// Samples documents `0..n` for `topic` into `run_dir/documents.jsonl`.
///
/// Documents already on disk are kept and not regenerated, so a failed run
/// resumes where it stopped. Each finished document is appended as soon as it
/// arrives; on error the first failure is returned after in-flight work ends.
pub fn generate_documents(
    gw: &Gateway,
    topic: &Topic,
    n: usize,
    opts: &GenerationOptions,
    run_dir: &Path,
) -> Result<Vec<Document>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let path = documents_path(run_dir);
    std::fs::create_dir_all(run_dir).map_err(|e| Error::io(run_dir, e))?;
    let existing: HashSet<usize> = if path.exists() {
        read_documents(&path)?.into_iter().map(|d| d.doc_id).collect()
    } else {
        HashSet::new()
    };
    let missing: Vec<usize> = (0..n).filter(|i| !existing.contains(i)).collect();
    if !missing.is_empty() {
        info!("generating {} of {n} documents for {:?}", missing.len(), topic.slug);
    }

    let (system, user) = prompts::generation(&topic.text, &opts.time_anchor);
    let fingerprint = prompts::fingerprint(&system, &user);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    let writer = Mutex::new(file);

    let results = bounded_map(&missing, gw.max_parallel(), |_, &doc_id| -> Result<()> {
        let req = ChatRequest::new(system.as_str(), user.as_str())
            .temperature(opts.temperature)
            .max_tokens(opts.max_tokens)
            .seed(doc_id as u64);
        let text = gw.chat(&req)?;
        let doc = Document {
            doc_id,
            topic_slug: topic.slug.clone(),
            text,
            model: gw.chat_model().to_string(),
            created_at: Utc::now(),
            prompt_fingerprint: fingerprint.clone(),
        };
        let mut f = writer.lock().expect("corpus writer poisoned");
        jsonl::append(&mut f, &path, &doc)
    });
    drop(writer);
    results.into_iter().collect::<Result<()>>()?;

    let mut docs = read_documents(&path)?;
    docs.sort_by_key(|d| d.doc_id);
    // rewrite in doc_id order once the set is complete
    jsonl::write_all(&path, &docs)?;
    docs.retain(|d| d.doc_id < n);
    Ok(docs)
}

/// Loads `dir/{topic_slug}/documents.jsonl`.
pub fn load_corpus(topic_slug: &str, dir: &Path) -> Result<Vec<Document>> {
    read_documents(&documents_path(&dir.join(topic_slug)))
}

/// Reads a corpus file in doc_id order. Also accepts externally prepared
/// corpora in the same format.
pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let corrupt = |line: usize, message: String| Error::CorruptCorpus {
        path: path.to_path_buf(),
        line,
        message,
    };
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut by_id = BTreeMap::new();
    for (idx, raw) in contents.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(raw).map_err(|e| corrupt(line, e.to_string()))?;
        if doc.text.trim().is_empty() {
            return Err(corrupt(line, format!("document {} has empty text", doc.doc_id)));
        }
        if by_id.insert(doc.doc_id, doc).is_some() {
            return Err(corrupt(line, "duplicate doc_id".into()));
        }
    }
    Ok(by_id.into_values().collect())
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    let mut sorted = docs.to_vec();
    sorted.sort_by_key(|d| d.doc_id);
    jsonl::write_all(path, &sorted)
}
