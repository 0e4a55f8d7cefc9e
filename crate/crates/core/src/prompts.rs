//! Prompt templates for every LLM call the pipeline makes.
//!
//! The leading sentence of each system prompt doubles as a role marker that
//! the mock provider uses to decide which kind of answer to fabricate.

use sha2::{Digest, Sha256};

pub const DEFAULT_TIME_ANCHOR: &str = "it is currently January 2026";

pub const GENERATION_SYSTEM_PREFIX: &str =
    "You are an analyst who writes analytical documents on economics and international politics in English.";
pub const EXTRACTION_SYSTEM_PREFIX: &str =
    "You are a specialist at extracting \"meaningful events\" from English text.";
pub const NAMING_SYSTEM_PREFIX: &str =
    "You are an editor who writes a representative text (event) for a cluster of policy/economic scenario sentences.";
pub const MATCHER_SYSTEM_PREFIX: &str =
    "You are an adjudicator who decides whether an event mention denotes the same event as a registered canonical event.";

pub const NAMING_USER_HEADER: &str =
    "Create exactly one English text (event) that represents the following examples, 10 words or fewer:";
pub const MATCHER_MENTION_LABEL: &str = "Mention: ";
pub const MATCHER_CANDIDATES_LABEL: &str = "Candidates:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Generation,
    Extraction,
    Naming,
    Matcher,
    Other,
}

impl PromptKind {
    pub fn detect(system: &str) -> Self {
        if system.starts_with(GENERATION_SYSTEM_PREFIX) {
            PromptKind::Generation
        } else if system.starts_with(EXTRACTION_SYSTEM_PREFIX) {
            PromptKind::Extraction
        } else if system.starts_with(NAMING_SYSTEM_PREFIX) {
            PromptKind::Naming
        } else if system.starts_with(MATCHER_SYSTEM_PREFIX) {
            PromptKind::Matcher
        } else {
            PromptKind::Other
        }
    }
}

pub fn generation(topic: &str, time_anchor: &str) -> (String, String) {
    let system = format!(
        "{GENERATION_SYSTEM_PREFIX} Analyze the given topic in detail, grounding your discussion \
         in concrete events and keeping in mind what causes what and what happens as a result. \
         Note: {time_anchor}."
    );
    let user = format!("Create an analytical document in English analyzing: \"{topic}\".");
    (system, user)
}

pub fn extraction(text: &str) -> (String, String) {
    let system = format!(
        "{EXTRACTION_SYSTEM_PREFIX}\n\n\
         ## Purpose\n\
         From the input text, extract events such as incidents, judgments, policy changes, \
         decisions made in meetings, changes in outlook, and recognition of risks.\n\n\
         ## Extraction rules\n\
         - Each event should make clear what happened / was judged / was signaled.\n\
         - If possible, include timing (e.g., 'Dec 2025 meeting'), actor (e.g., government and firm), \
         and outcome (e.g., stocks rose, interest rates fell, sentiment deteriorated) in the event name.\n\
         - Consolidate duplicates that describe the same content into a single item.\n\n\
         ## Output (list format only)\n\
         Output a list consisting of English event names."
    );
    let user = format!("Extract important events from the following text.\n{text}");
    (system, user)
}

pub fn naming(examples: &[String]) -> (String, String) {
    let system = format!(
        "{NAMING_SYSTEM_PREFIX} Return exactly one English text (event) that represents the given \
         examples, 10 words or fewer. Constraint: avoid meaningless cluster names such as 'Other'."
    );
    let mut user = String::from(NAMING_USER_HEADER);
    for ex in examples {
        user.push_str("\n- ");
        user.push_str(ex);
    }
    (system, user)
}

/// A registered event offered to the matcher.
pub struct MatchCandidate<'a> {
    pub canon_id: usize,
    pub name: &'a str,
    pub members: &'a [String],
}

pub fn matcher(mention: &str, candidates: &[MatchCandidate<'_>]) -> (String, String) {
    let system = format!(
        "{MATCHER_SYSTEM_PREFIX} Merge only when both texts describe the same underlying event. \
         If they match, you may propose an improved canonical name of 10 words or fewer that covers \
         both. Reply with JSON only: {{\"match\": true|false, \"canon_id\": <id>, \"name\": \"<canonical name>\"}}."
    );
    let mut user = format!("{MATCHER_MENTION_LABEL}{mention}\n{MATCHER_CANDIDATES_LABEL}");
    for c in candidates {
        user.push_str(&format!("\n[{}] {}", c.canon_id, c.name));
        if !c.members.is_empty() {
            let shown: Vec<&str> = c.members.iter().take(5).map(String::as_str).collect();
            user.push_str(" | members: ");
            user.push_str(&shown.join("; "));
        }
    }
    (system, user)
}

/// Hex SHA-256 over the exact prompt pair.
pub fn fingerprint(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0u8]);
    h.update(user.as_bytes());
    hex::encode(h.finalize())
}
