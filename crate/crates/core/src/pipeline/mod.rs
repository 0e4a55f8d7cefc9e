//! Per-topic run orchestration: generate → extract → canonicalize → matrix
//! → discover, each stage reading the previous stage's files and gated by
//! checksums recorded in `manifest.json`.

mod config;
mod manifest;

use std::path::{Path, PathBuf};

use chrono::Utc;
use log::{info, warn};

use crate::canonicalize::{
    canonicalize_embedding_first, canonicalize_incremental, vocabulary_of, CanonParams, CanonicalMap,
};
use crate::corpus::{self, Topic};
use crate::discovery::{direct_lingam, ges, pc, DataCiTest};
use crate::error::{Error, Result};
use crate::extraction::{self, EventRecord};
use crate::incidence::{aggregate, build_raw_matrix, drop_noninformative, IncidenceMatrix};
use crate::llm::{bounded_map, Gateway};
use crate::report::{write_report, GraphBundle};

pub use config::{RunConfig, ScoreChoice};
pub use manifest::{file_checksum, sha256_hex, RunManifest, Stage, StageRecord, StageStatus, MANIFEST_FILE};

/// Well-known file locations inside `runs/{topic_slug}/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub dir: PathBuf,
}

impl RunPaths {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn file(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn documents(&self) -> PathBuf {
        self.file("documents.jsonl")
    }

    pub fn events_raw(&self) -> PathBuf {
        self.file("events_raw.jsonl")
    }

    pub fn events_canon(&self) -> PathBuf {
        self.file("events_canon.jsonl")
    }

    pub fn canonical_map(&self) -> PathBuf {
        self.file("canonical_map.json")
    }

    pub fn matrix(&self) -> PathBuf {
        self.file("matrix.csv")
    }

    pub fn bundle(&self) -> PathBuf {
        self.file("graphs/bundle.json")
    }

    pub fn report(&self) -> PathBuf {
        self.file("report.md")
    }

    pub fn manifest(&self) -> PathBuf {
        RunManifest::path(&self.dir)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Force this stage and every later one; earlier stages must be done.
    pub from: Option<Stage>,
    /// Stop after this stage.
    pub until: Option<Stage>,
    /// Delete the run directory first.
    pub fresh: bool,
    /// Import `documents.jsonl` from `{corpus}/{topic_slug}/` instead of generating.
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub executed: Vec<Stage>,
    pub skipped: Vec<Stage>,
    /// Upstream chat and embedding calls made during this invocation.
    pub provider_calls: usize,
    /// Present when the discover stage is done.
    pub bundle: Option<GraphBundle>,
}

/// A run directory for one topic and its manifest.
pub struct Pipeline {
    cfg: RunConfig,
    topic: Topic,
    paths: RunPaths,
    manifest: RunManifest,
    gateway: Option<Gateway>,
}

impl Pipeline {
    /// Opens (or starts) the run for `topic` under `cfg.out`.
    pub fn new(topic: &str, mut cfg: RunConfig) -> Result<Self> {
        let topic = Topic::new(topic)?;
        cfg.topic = Some(topic.text.clone());
        cfg.validate()?;
        let paths = RunPaths::new(cfg.out.join(&topic.slug));
        let manifest = if paths.manifest().exists() {
            let mut m = RunManifest::read(&paths.dir)?;
            if m.topic != topic {
                warn!("run directory {} belonged to topic {:?}", paths.dir.display(), m.topic.text);
                m.topic = topic.clone();
            }
            m.params = cfg.clone();
            m
        } else {
            RunManifest::new(topic.clone(), cfg.clone())
        };
        Ok(Self {
            cfg,
            topic,
            paths,
            manifest,
            gateway: None,
        })
    }

    /// Uses `gw` instead of building one from the config.
    pub fn with_gateway(mut self, gw: Gateway) -> Self {
        self.gateway = Some(gw);
        self
    }

    pub fn paths(&self) -> &RunPaths {
        &self.paths
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn topic(&self) -> &Topic {
        &self.topic
    }

    fn calls(&self) -> usize {
        self.gateway.as_ref().map_or(0, Gateway::upstream_calls)
    }

    fn gateway(&mut self) -> Result<Gateway> {
        if self.gateway.is_none() {
            self.gateway = Some(Gateway::from_config(&self.cfg.provider_config())?);
        }
        Ok(self.gateway.clone().expect("gateway set above"))
    }

    fn params_hash(&self, stage: Stage) -> String {
        sha256_hex(self.cfg.stage_params(stage).to_string().as_bytes())
    }

    fn checksums(&self, files: &[&str]) -> Result<Vec<(String, String)>> {
        files
            .iter()
            .map(|f| Ok((f.to_string(), file_checksum(&self.paths.file(f))?)))
            .collect()
    }

    /// Whether `stage` must run: not done, settings changed, an output is
    /// missing, or an input differs from what it last consumed. Outputs that
    /// were edited by hand are accepted as the stage's new result.
    fn needs_run(&mut self, stage: Stage) -> Result<bool> {
        let hash = self.params_hash(stage);
        let Some(rec) = self.manifest.record(stage) else {
            return Ok(true);
        };
        if rec.status != StageStatus::Done || rec.params_hash != hash {
            return Ok(true);
        }
        if stage.outputs().iter().any(|f| !self.paths.file(f).exists()) {
            return Ok(true);
        }
        for f in stage.inputs() {
            let path = self.paths.file(f);
            if !path.exists() || rec.inputs.get(*f) != Some(&file_checksum(&path)?) {
                return Ok(true);
            }
        }
        for (f, sum) in self.checksums(stage.outputs())? {
            let rec = self.manifest.record_mut(stage);
            if rec.outputs.get(&f) != Some(&sum) {
                info!("{f} was modified after {stage}; keeping it");
                rec.outputs.insert(f, sum);
            }
        }
        Ok(false)
    }

    /// Runs every stage that needs it, in order.
    pub fn run(&mut self, opts: &RunOptions) -> Result<RunOutcome> {
        if opts.fresh && self.paths.dir.exists() {
            info!("removing {}", self.paths.dir.display());
            std::fs::remove_dir_all(&self.paths.dir).map_err(|e| Error::io(&self.paths.dir, e))?;
            self.manifest = RunManifest::new(self.topic.clone(), self.cfg.clone());
        }
        std::fs::create_dir_all(&self.paths.dir).map_err(|e| Error::io(&self.paths.dir, e))?;
        let calls_before = self.calls();
        let mut executed = Vec::new();
        let mut skipped = Vec::new();
        for stage in Stage::ALL {
            let forced = opts.from.is_some_and(|f| stage >= f);
            let before_from = opts.from.is_some_and(|f| stage < f);
            if before_from {
                if let Some(missing) = stage.outputs().iter().find(|f| !self.paths.file(f).exists()) {
                    return Err(Error::artifact(
                        self.paths.file(missing),
                        format!("missing output of {stage}; run without --from first"),
                    ));
                }
                skipped.push(stage);
            } else if forced || self.needs_run(stage)? {
                self.execute(stage, opts)?;
                executed.push(stage);
            } else {
                info!("{stage}: up to date");
                skipped.push(stage);
            }
            if opts.until == Some(stage) {
                break;
            }
        }
        self.manifest.write(&self.paths.dir)?;
        let bundle = if self.manifest.status(Stage::Discover) == StageStatus::Done && self.paths.bundle().exists() {
            Some(read_bundle(&self.paths.bundle())?)
        } else {
            None
        };
        Ok(RunOutcome {
            executed,
            skipped,
            provider_calls: self.calls() - calls_before,
            bundle,
        })
    }

    /// Runs exactly one stage, regardless of its status.
    pub fn run_stage(&mut self, stage: Stage, corpus: Option<&Path>) -> Result<()> {
        std::fs::create_dir_all(&self.paths.dir).map_err(|e| Error::io(&self.paths.dir, e))?;
        let opts = RunOptions {
            corpus: corpus.map(Path::to_path_buf),
            ..RunOptions::default()
        };
        self.execute(stage, &opts)?;
        self.manifest.write(&self.paths.dir)
    }

    fn execute(&mut self, stage: Stage, opts: &RunOptions) -> Result<()> {
        for f in stage.inputs() {
            let path = self.paths.file(f);
            if !path.exists() {
                return Err(Error::artifact(path, format!("{stage} needs this file; run the earlier stages first")));
            }
        }
        info!("{stage}: running");
        let inputs = self.checksums(stage.inputs())?;
        let calls_before = self.calls();
        let started = Utc::now();
        {
            let rec = self.manifest.record_mut(stage);
            rec.status = StageStatus::Pending;
            rec.started_at = Some(started);
            rec.finished_at = None;
            rec.error = None;
        }
        let result = match stage {
            Stage::Generate => self.stage_generate(opts.corpus.as_deref()),
            Stage::Extract => self.stage_extract(),
            Stage::Canonicalize => self.stage_canonicalize(),
            Stage::Matrix => self.stage_matrix(),
            Stage::Discover => self.stage_discover(),
        };
        let calls = self.calls() - calls_before;
        let hash = self.params_hash(stage);
        let outputs = match &result {
            Ok(()) => self.checksums(stage.outputs()),
            Err(_) => Ok(Vec::new()),
        };
        let rec = self.manifest.record_mut(stage);
        rec.finished_at = Some(Utc::now());
        rec.provider_calls = calls;
        let outcome = result.and(outputs);
        match &outcome {
            Ok(outputs) => {
                rec.status = StageStatus::Done;
                rec.params_hash = hash;
                rec.inputs = inputs.into_iter().collect();
                rec.outputs = outputs.iter().cloned().collect();
            }
            Err(e) => {
                rec.status = StageStatus::Failed;
                rec.error = Some(e.to_string());
            }
        }
        self.manifest.write(&self.paths.dir)?;
        outcome.map(|_| ())
    }

    fn stage_generate(&mut self, corpus_dir: Option<&Path>) -> Result<()> {
        let docs = match corpus_dir {
            Some(dir) => {
                let docs = corpus::load_corpus(&self.topic.slug, dir)?;
                info!("imported {} documents from {}", docs.len(), dir.display());
                docs
            }
            None => {
                let gw = self.gateway()?;
                corpus::generate_documents(&gw, &self.topic, self.cfg.n, &self.cfg.generation_options(), &self.paths.dir)?
            }
        };
        corpus::write_documents(&self.paths.documents(), &docs)
    }

    fn stage_extract(&mut self) -> Result<()> {
        let docs = corpus::read_documents(&self.paths.documents())?;
        let gw = self.gateway()?;
        let opts = self.cfg.extraction_options();
        let records = bounded_map(&docs, gw.max_parallel(), |_, doc| {
            extraction::extract_events(&gw, doc, &opts).map(|m| EventRecord::from_mentions(doc.doc_id, &m))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let total: usize = records.iter().map(|r| r.mentions.len()).sum();
        info!("extracted {total} mentions from {} documents", records.len());
        extraction::write_event_records(&self.paths.events_raw(), &records)
    }

    fn stage_canonicalize(&mut self) -> Result<()> {
        let records = extraction::read_event_records(&self.paths.events_raw())?;
        let gw = self.gateway()?;
        let first = canonicalize_embedding_first(&gw, &records, &self.cfg.embedding_first_options())?;
        let result = if self.cfg.refine {
            let second = canonicalize_incremental(&gw, &first.records, &self.cfg.incremental_options())?;
            let registry = first.registry.compose(&second.registry)?;
            crate::canonicalize::Canonicalization {
                registry,
                records: second.records,
            }
        } else {
            first
        };
        result.registry.validate()?;
        let stale = result.registry.stale_positions(&result.records);
        if !stale.is_empty() {
            return Err(Error::InvalidInput(format!("{} stale canonical names after rewrite", stale.len())));
        }
        info!("{} canonical events", result.registry.len());
        let params = CanonParams {
            k_max: self.cfg.k_max,
            tau: self.cfg.tau,
            seed: self.cfg.seed,
            method: self.cfg.canon_method().into(),
        };
        CanonicalMap::new(&result.registry, params).write(&self.paths.canonical_map())?;
        extraction::write_event_records(&self.paths.events_canon(), &result.records)
    }

    fn stage_matrix(&mut self) -> Result<()> {
        let records = extraction::read_event_records(&self.paths.events_raw())?;
        let registry = CanonicalMap::read(&self.paths.canonical_map())?.registry()?;
        let x = build_raw_matrix(&records, &vocabulary_of(&records))?;
        let z = aggregate(&x, &registry)?;
        let (z, dropped) = match drop_noninformative(&z) {
            Ok(v) => v,
            Err(e) => {
                self.manifest.matrix_shape = None;
                return Err(e);
            }
        };
        info!(
            "matrix {} × {} ({} raw columns, {} dropped)",
            z.n_rows(),
            z.n_cols(),
            x.n_cols(),
            dropped.len()
        );
        self.manifest.matrix_shape = Some(z.shape());
        self.manifest.dropped_columns = dropped;
        z.write_csv(&self.paths.matrix())
    }

    fn stage_discover(&mut self) -> Result<()> {
        let z = IncidenceMatrix::read_csv(&self.paths.matrix())?;
        let map = CanonicalMap::read(&self.paths.canonical_map())?;
        let bundle = discover(&z, &self.cfg)?;
        let mut text = serde_json::to_string_pretty(&bundle)?;
        text.push('\n');
        crate::jsonl::write_atomic(&self.paths.bundle(), text.as_bytes())?;
        self.manifest.matrix_shape = Some(z.shape());
        write_report(&bundle, &self.manifest, &map.events, &self.paths.dir)?;
        Ok(())
    }
}

/// PC, GES and DirectLiNGAM on one incidence matrix.
pub fn discover(z: &IncidenceMatrix, cfg: &RunConfig) -> Result<GraphBundle> {
    let labels = z.col_labels().to_vec();
    let cols = z.columns();
    let test = DataCiTest::new(&cols, cfg.alpha)?.with_statistic(cfg.ci_test);
    let pc_graph = pc(&test, &labels, cfg.max_cond)?.cpdag;
    let ges_graph = ges(&cols, &labels, cfg.score_kind())?.cpdag;
    let lingam = direct_lingam(&z.to_f64_columns(), &labels, &cfg.lingam_options())?;
    GraphBundle::new(pc_graph, ges_graph, lingam)
}

fn read_bundle(path: &Path) -> Result<GraphBundle> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::artifact(path, e))
}

/// Runs (or resumes) every stage for `topic` and returns the three graphs.
pub fn run_pipeline(topic: &str, cfg: RunConfig) -> Result<GraphBundle> {
    let mut p = Pipeline::new(topic, cfg)?;
    let outcome = p.run(&RunOptions::default())?;
    outcome
        .bundle
        .ok_or_else(|| Error::InvalidInput("discover stage did not complete".into()))
}
