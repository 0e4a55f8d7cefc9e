use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunConfig;
use crate::corpus::Topic;
use crate::error::{Error, Result};
use crate::incidence::DroppedColumn;
use crate::jsonl;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Generate,
    Extract,
    Canonicalize,
    Matrix,
    Discover,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Generate,
        Stage::Extract,
        Stage::Canonicalize,
        Stage::Matrix,
        Stage::Discover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Extract => "extract",
            Stage::Canonicalize => "canonicalize",
            Stage::Matrix => "matrix",
            Stage::Discover => "discover",
        }
    }

    /// Files (relative to the run directory) the stage reads.
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Stage::Generate => &[],
            Stage::Extract => &["documents.jsonl"],
            Stage::Canonicalize => &["events_raw.jsonl"],
            Stage::Matrix => &["events_raw.jsonl", "canonical_map.json"],
            Stage::Discover => &["matrix.csv", "canonical_map.json"],
        }
    }

    /// Files (relative to the run directory) the stage writes.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Generate => &["documents.jsonl"],
            Stage::Extract => &["events_raw.jsonl"],
            Stage::Canonicalize => &["canonical_map.json", "events_canon.jsonl"],
            Stage::Matrix => &["matrix.csv"],
            Stage::Discover => &[
                "graphs/pc.dot",
                "graphs/ges.dot",
                "graphs/lingam.dot",
                "graphs/bundle.json",
                "report.md",
            ],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    #[default]
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: StageStatus,
    /// Digest of the settings the stage depends on.
    pub params_hash: String,
    /// File → sha256 of inputs as read and outputs as written.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub provider_calls: usize,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub topic: Topic,
    pub params: RunConfig,
    pub stages: BTreeMap<Stage, StageRecord>,
    pub dropped_columns: Vec<DroppedColumn>,
    pub matrix_shape: Option<(usize, usize)>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl RunManifest {
    pub fn new(topic: Topic, params: RunConfig) -> Self {
        let now = Utc::now();
        Self {
            topic,
            params,
            stages: Stage::ALL.into_iter().map(|s| (s, StageRecord::default())).collect(),
            dropped_columns: Vec::new(),
            matrix_shape: None,
            created_at: now,
            updated_at: now,
        }
    }

    pub fn status(&self, stage: Stage) -> StageStatus {
        self.stages.get(&stage).map(|r| r.status).unwrap_or_default()
    }

    pub fn record(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.get(&stage)
    }

    pub fn record_mut(&mut self, stage: Stage) -> &mut StageRecord {
        self.stages.entry(stage).or_default()
    }

    pub fn path(run_dir: &Path) -> PathBuf {
        run_dir.join(MANIFEST_FILE)
    }

    pub fn read(run_dir: &Path) -> Result<Self> {
        let path = Self::path(run_dir);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::artifact(&path, e))
    }

    /// Atomic write, so a crash never leaves a half-written manifest.
    pub fn write(&mut self, run_dir: &Path) -> Result<()> {
        self.updated_at = Utc::now();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        jsonl::write_atomic(&Self::path(run_dir), text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_checksum(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
