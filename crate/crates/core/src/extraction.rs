//! Event extraction and normalization of free-form LLM list output.

use std::collections::HashSet;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::llm::{ChatRequest, Gateway};
use crate::prompts;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMention {
    pub doc_id: usize,
    pub position: usize,
    pub raw: String,
    pub cleaned: String,
}

/// Per-document list of cleaned mentions, as persisted in `events_raw.jsonl`
/// and (after rewriting) `events_canon.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub doc_id: usize,
    pub mentions: Vec<String>,
}

impl EventRecord {
    pub fn from_mentions(doc_id: usize, mentions: &[EventMention]) -> Self {
        Self {
            doc_id,
            mentions: mentions.iter().map(|m| m.cleaned.clone()).collect(),
        }
    }
}

pub fn write_event_records(path: &Path, records: &[EventRecord]) -> Result<()> {
    jsonl::write_all(path, records)
}

pub fn read_event_records(path: &Path) -> Result<Vec<EventRecord>> {
    let mut records: Vec<EventRecord> = jsonl::read_all(path)?;
    records.sort_by_key(|r| r.doc_id);
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct ExtractionOptions {
    pub max_tokens: u32,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self { max_tokens: 2048 }
    }
}

/// One chat call per document. Unusable responses yield an empty list.
pub fn extract_events(gw: &Gateway, doc: &Document, opts: &ExtractionOptions) -> Result<Vec<EventMention>> {
    if doc.text.trim().is_empty() {
        return Err(Error::InvalidInput(format!("document {} has empty text", doc.doc_id)));
    }
    let (system, user) = prompts::extraction(&doc.text);
    let req = ChatRequest::new(system, user).max_tokens(opts.max_tokens);
    let response = match gw.chat(&req) {
        Ok(text) => text,
        Err(Error::EmptyResponse) => String::new(),
        Err(e) => return Err(e),
    };
    let mentions = mentions_from_response(doc.doc_id, &response);
    if mentions.is_empty() {
        warn!("document {}: no events recognized in extraction output", doc.doc_id);
    }
    Ok(mentions)
}

/// Normalize, clean and deduplicate (first occurrence wins) one raw response.
pub fn mentions_from_response(doc_id: usize, response: &str) -> Vec<EventMention> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for raw in normalize_llm_list(response) {
        let cleaned = clean_mention(&raw);
        if cleaned.is_empty() || !seen.insert(cleaned.clone()) {
            continue;
        }
        out.push(EventMention {
            doc_id,
            position: out.len(),
            raw,
            cleaned,
        });
    }
    out
}

/// Turns messy list-shaped LLM output into a list of strings.
///
/// Strategies in order: a JSON array (or an object wrapping exactly one
/// string array), a quoted list literal such as `['a', "b"]`, then line
/// splitting with bullet stripping. Comma splitting applies only when the
/// whole text is a single line.
pub fn normalize_llm_list(text: &str) -> Vec<String> {
    let body = strip_code_fence(text.trim());
    if let Some(items) = parse_json_list(body) {
        return items;
    }
    if let Some(items) = parse_quoted_list(body) {
        if !items.is_empty() {
            return items;
        }
    }
    fallback_split(body)
}

fn strip_code_fence(text: &str) -> &str {
    let Some(rest) = text.strip_prefix("```") else {
        return text;
    };
    let Some(rest) = rest.strip_suffix("```") else {
        return text;
    };
    // drop an info string such as `json` on the opening fence line
    match rest.split_once('\n') {
        Some((info, body)) if !info.trim().contains(' ') => body.trim(),
        _ => rest.trim(),
    }
}

fn json_items(arr: &[Value]) -> Vec<String> {
    arr.iter()
        .filter_map(|v| match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            Value::Bool(b) => Some(b.to_string()),
            _ => None,
        })
        .collect()
}

/// `Some` whenever the text is a JSON array, even an empty one, so that JSON
/// input never reaches the fallback splitter.
fn parse_json_list(text: &str) -> Option<Vec<String>> {
    match serde_json::from_str::<Value>(text).ok()? {
        Value::Array(arr) => Some(json_items(&arr)),
        Value::Object(map) => {
            let arrays: Vec<&Vec<Value>> = map
                .values()
                .filter_map(|v| match v {
                    Value::Array(a) if a.iter().all(Value::is_string) => Some(a),
                    _ => None,
                })
                .collect();
            match arrays.as_slice() {
                [only] => Some(json_items(only)),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Grammar: `'[' (item (',' item)* ','?)? ']'` where an item is a single- or
/// double-quoted string with backslash escapes. Must consume the whole input.
fn parse_quoted_list(text: &str) -> Option<Vec<String>> {
    let mut chars = text.chars().peekable();
    let skip_ws = |it: &mut std::iter::Peekable<std::str::Chars<'_>>| {
        while it.peek().is_some_and(|c| c.is_whitespace()) {
            it.next();
        }
    };

    skip_ws(&mut chars);
    if chars.next()? != '[' {
        return None;
    }
    let mut items = Vec::new();
    loop {
        skip_ws(&mut chars);
        match chars.next()? {
            ']' => break,
            q @ ('\'' | '"') => {
                let mut item = String::new();
                loop {
                    match chars.next()? {
                        '\\' => match chars.next()? {
                            'n' => item.push('\n'),
                            't' => item.push('\t'),
                            'r' => item.push('\r'),
                            other => item.push(other),
                        },
                        c if c == q => break,
                        c => item.push(c),
                    }
                }
                items.push(item);
                skip_ws(&mut chars);
                match chars.next()? {
                    ',' => continue,
                    ']' => break,
                    _ => return None,
                }
            }
            _ => return None,
        }
    }
    skip_ws(&mut chars);
    if chars.next().is_some() {
        return None;
    }
    Some(items)
}

pub(crate) fn strip_bullet(line: &str) -> &str {
    let line = line.trim();
    for marker in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(marker) {
            return rest.trim_start();
        }
    }
    if let Some(rest) = line.strip_prefix(['-', '*', '•']) {
        return rest.trim_start();
    }
    // numbered markers 1. through 99.
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    let after = &line[digits..];
    let marker = after.starts_with('.') && after[1..].chars().next().is_none_or(char::is_whitespace);
    if (1..=2).contains(&digits) && marker {
        let n: u32 = line[..digits].parse().unwrap_or(0);
        if (1..=99).contains(&n) {
            return line[digits + 1..].trim_start();
        }
    }
    line
}

fn fallback_split(text: &str) -> Vec<String> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() == 1 {
        return strip_bullet(lines[0])
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
    }
    lines
        .iter()
        .map(|l| strip_bullet(l).trim())
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

const QUOTE_PAIRS: &[(char, char)] = &[('"', '"'), ('\'', '\''), ('`', '`'), ('“', '”'), ('‘', '’')];

/// Whitespace trimmed and collapsed, trailing `,`/`;` removed and matching
/// surrounding quotes stripped. Applied to a fixpoint so it is idempotent.
pub fn clean_mention(s: &str) -> String {
    let mut cur = s.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let mut next = cur.trim_end_matches([',', ';']).trim().to_string();
        for &(open, close) in QUOTE_PAIRS {
            if next.chars().count() >= 2 && next.starts_with(open) && next.ends_with(close) {
                next = next[open.len_utf8()..next.len() - close.len_utf8()].trim().to_string();
                break;
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}
