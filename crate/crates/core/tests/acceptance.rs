//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach stdout.
//! The process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are still run and reported.

mod common;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use causal_elicit::canonicalize::{
    canonicalize_embedding_first, canonicalize_incremental, vocabulary_of, CanonicalEvent, CanonicalRegistry,
    EmbeddingFirstOptions, IncrementalOptions,
};
use causal_elicit::discovery::{
    direct_lingam, ges, gsq_ci_test, pc, CiOracle, Cpdag, DSeparation, Dag, DataCiTest, LingamOptions, ScoreKind,
};
use causal_elicit::extraction::EventRecord;
use causal_elicit::incidence::{aggregate, IncidenceMatrix};
use causal_elicit::llm::{ChatRequest, Gateway, Provider, ProviderConfig};
use causal_elicit::pipeline::RunManifest;
use causal_elicit::{prompts, run_pipeline, RunConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_dags, essential_graph, labels, EdgeSets};

/// Criteria that cannot hold for any faithful implementation; see README.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "2",
    "Z = X xor Y with fair X, Y is marginally independent of X and of Y, so the collider is unfaithful",
)];

const TOPIC: &str = "Japan US tariff outlook";

type Criterion = (&'static str, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

// 1. Oracle PC over every DAG on 2..=4 nodes.
fn oracle_pc() -> Verdict {
    let start = Instant::now();
    let mut total = 0;
    let mut wrong = Vec::new();
    for n in 2..=4 {
        let universe = all_dags(n);
        for dag in &universe {
            total += 1;
            let truth = essential_graph(n, dag, &universe);
            let oracle = CiOracle::SyntheticDag(DSeparation::new(Dag::from_edges(n, dag).unwrap()));
            let got = pc(&oracle, &labels(n), n).unwrap().cpdag;
            if EdgeSets::of(&got) != truth {
                wrong.push(dag.clone());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        wrong.is_empty() && secs < 60.0,
        format!(
            "{}/{total} DAGs matched the essential graph, {secs:.2}s (limit 60s){}",
            total - wrong.len(),
            wrong.first().map(|d| format!("; first mismatch {d:?}")).unwrap_or_default()
        ),
    )
}

fn coin_columns(seed: u64, n: usize, child: impl Fn(bool, bool) -> bool) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<u8>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let x: bool = rng.random();
        let y: bool = rng.random();
        let z = child(x, y) ^ rng.random_bool(0.05);
        cols[0].push(x as u8);
        cols[1].push(y as u8);
        cols[2].push(z as u8);
    }
    cols
}

fn is_collider(g: &Cpdag) -> bool {
    g.directed_edges() == vec![(0, 2), (1, 2)] && g.undirected_edges().is_empty()
}

fn collider_recovery(child: impl Fn(bool, bool) -> bool + Copy) -> (usize, usize, usize, f64) {
    let start = Instant::now();
    let l = labels(3);
    let (mut pc_ok, mut ges_ok, mut both) = (0, 0, 0);
    for seed in 0..100 {
        let cols = coin_columns(seed, 2000, child);
        let test = DataCiTest::new(&cols, 0.1).unwrap();
        let a = is_collider(&pc(&test, &l, 3).unwrap().cpdag);
        let b = is_collider(&ges(&cols, &l, ScoreKind::BicMultinomial).unwrap().cpdag);
        pc_ok += a as usize;
        ges_ok += b as usize;
        both += (a && b) as usize;
    }
    (pc_ok, ges_ok, both, start.elapsed().as_secs_f64())
}

// 2. X, Y fair coins, Z = X xor Y with 5% flips.
fn xor_collider() -> Verdict {
    let (p, g, both, secs) = collider_recovery(|x, y| x ^ y);
    verdict(
        both >= 95 && secs < 30.0,
        format!("PC {p}/100, GES {g}/100, both {both}/100 (need >= 95), {secs:.2}s (limit 30s)"),
    )
}

// Supplementary: the same protocol with a faithful OR collider. PC keeps a
// spurious X - Y edge whenever the marginal test rejects, so its expected
// success rate is about 1 - alpha = 90%.
fn or_collider() -> Verdict {
    let (p, g, both, secs) = collider_recovery(|x, y| x | y);
    verdict(
        p >= 80 && g >= 95 && secs < 30.0,
        format!("PC {p}/100 (expect ~90, need >= 80), GES {g}/100 (need >= 95), both {both}/100, {secs:.2}s"),
    )
}

// 3. G² on two identical balanced columns.
fn gsq_hand_check() -> Verdict {
    let v: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
    let r = gsq_ci_test(&[v.clone(), v], 0, 1, &[], 0.1).unwrap();
    let expected = 200.0 * std::f64::consts::LN_2;
    let err = (r.statistic - expected).abs();
    verdict(
        err <= 1e-9 && r.p < 1e-6 && !r.independent,
        format!("G2 = {:.12} (|err| = {err:.1e}, tol 1e-9), dof = {}, p = {:.3e} (need < 1e-6)", r.statistic, r.dof, r.p),
    )
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

// 4. DirectLiNGAM: pair weight and 3-chain root placement.
fn lingam_recovery() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x0: Vec<f64> = (0..5000).map(|_| uniform(&mut rng)).collect();
    let x1: Vec<f64> = x0.iter().map(|&a| 0.8 * a + uniform(&mut rng)).collect();
    let w = direct_lingam(&[x0, x1], &labels(2), &LingamOptions::default()).unwrap();
    let b = w.b[1][0];
    let pair_ok = w.order == vec![0, 1] && (b - 0.8).abs() <= 0.05;

    let mut root_first = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 2000;
        let a: Vec<f64> = (0..n).map(|_| uniform(&mut rng)).collect();
        let b: Vec<f64> = a.iter().map(|&v| 0.9 * v + uniform(&mut rng)).collect();
        let c: Vec<f64> = b.iter().map(|&v| -0.7 * v + uniform(&mut rng)).collect();
        // hide the true order behind a random column permutation
        let mut perm = [0, 1, 2];
        perm.shuffle(&mut rng);
        let chain = [a, b, c];
        let cols: Vec<Vec<f64>> = perm.iter().map(|&p| chain[p].clone()).collect();
        let root_col = perm.iter().position(|&p| p == 0).unwrap();
        let w = direct_lingam(&cols, &labels(3), &LingamOptions::default()).unwrap();
        root_first += (w.order[0] == root_col) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        pair_ok && root_first >= 95 && secs < 20.0,
        format!(
            "pair order {:?}, b = {b:.4} (tol 0.05); chain root first {root_first}/100 (need >= 95); {secs:.2}s (limit 20s)",
            w.order
        ),
    )
}

// 5. OR-merge against a triple loop.
fn or_merge_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let m = rng.random_range(1..=20);
        let density: f64 = rng.random();
        let x: Vec<Vec<u8>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_bool(density) as u8).collect())
            .collect();
        let raw: Vec<String> = (0..m).map(|j| format!("raw {j}")).collect();
        let g = rng.random_range(1..=m);
        let assign: Vec<usize> = (0..m).map(|_| rng.random_range(0..g)).collect();
        // relabel groups densely in order of first use
        let mut order: Vec<usize> = Vec::new();
        for &a in &assign {
            if !order.contains(&a) {
                order.push(a);
            }
        }
        let group: Vec<usize> = assign.iter().map(|a| order.iter().position(|o| o == a).unwrap()).collect();
        let events: Vec<CanonicalEvent> = (0..order.len())
            .map(|c| CanonicalEvent {
                canon_id: c,
                name: format!("event {c}"),
                members: (0..m).filter(|&j| group[j] == c).map(|j| raw[j].clone()).collect(),
                occurrences: Vec::new(),
            })
            .collect();
        let reg = CanonicalRegistry::from_events(events).unwrap();
        let row_ids: Vec<usize> = (0..n).map(|i| i * 3).collect();
        let xm = IncidenceMatrix::new(x.clone(), raw, row_ids.clone()).unwrap();
        let z = aggregate(&xm, &reg).unwrap();

        let mut expected = vec![vec![0u8; order.len()]; n];
        for (i, row) in expected.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                for j in 0..m {
                    if group[j] == c {
                        *cell = (*cell).max(x[i][j]);
                    }
                }
            }
        }
        let names: Vec<String> = (0..order.len()).map(|c| format!("event {c}")).collect();
        if z.rows() != expected || z.col_labels() != names.as_slice() || z.row_ids() != row_ids.as_slice() {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("{}/1000 instances equal the oracle", 1000 - bad))
}

/// Two default mock runs in separate output roots, shared by criteria 6 and 7.
fn mock_runs() -> &'static (tempfile::TempDir, PathBuf, PathBuf) {
    static RUNS: OnceLock<(tempfile::TempDir, PathBuf, PathBuf)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let mut dirs = Vec::new();
        for name in ["a", "b"] {
            let cfg = RunConfig {
                out: tmp.path().join(name),
                ..RunConfig::default()
            };
            run_pipeline(TOPIC, cfg).unwrap();
            dirs.push(tmp.path().join(name).join("japan-us-tariff-outlook"));
        }
        let b = dirs.pop().unwrap();
        let a = dirs.pop().unwrap();
        (tmp, a, b)
    })
}

// 6. Default configuration recorded in the manifest.
fn config_snapshot() -> Verdict {
    let (_, dir, _) = mock_runs();
    let m = RunManifest::read(dir).unwrap();
    let p = &m.params;
    let raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(RunManifest::path(dir)).unwrap()).unwrap();
    let json = &raw["params"];
    let ok = p.n == 100
        && p.k_max == 30
        && p.alpha == 0.1
        && p.representatives == 5
        && json["n"] == 100
        && json["k_max"] == 30
        && json["alpha"] == 0.1
        && json["representatives"] == 5;
    verdict(
        ok,
        format!(
            "n = {}, k_max = {}, alpha = {}, m = {} (manifest.json params)",
            json["n"], json["k_max"], json["alpha"], json["representatives"]
        ),
    )
}

// 7. Byte-identical artifacts across two runs.
fn determinism() -> Verdict {
    let (_, a, b) = mock_runs();
    let files = [
        "matrix.csv",
        "canonical_map.json",
        "graphs/pc.dot",
        "graphs/ges.dot",
        "graphs/lingam.dot",
    ];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| read(a, f) != read(b, f))
        .collect();
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} artifacts byte-identical", files.len())
        } else {
            format!("differing: {differing:?}")
        },
    )
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    std::fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(rel).display()))
}

// 8. Canonical vocabulary bound over random fixtures.
fn vocabulary_bound() -> Verdict {
    let phrase = "[a-z]{3,7}( [a-z]{3,7}){0,3}";
    let lists = prop::collection::vec(prop::collection::vec(phrase, 0..6), 1..8)
        .prop_filter("needs a mention", |l| l.iter().any(|d| !d.is_empty()));
    let strategy = (lists, 1usize..=12, any::<u64>());
    let mut runner = TestRunner::new(PropConfig {
        cases: 200,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let result = runner.run(&strategy, |(lists, k_max, seed)| {
        let records: Vec<EventRecord> = lists
            .into_iter()
            .enumerate()
            .map(|(doc_id, mentions)| EventRecord { doc_id, mentions })
            .collect();
        let m = vocabulary_of(&records).len();
        let gw = Gateway::from_config(&ProviderConfig::mock(seed)).unwrap();
        let opts = EmbeddingFirstOptions {
            k_max,
            seed,
            ..EmbeddingFirstOptions::default()
        };
        let canon = canonicalize_embedding_first(&gw, &records, &opts).unwrap();
        let bound = k_max.min(m);
        let mut used: Vec<&String> = canon.records.iter().flat_map(|r| &r.mentions).collect();
        used.sort();
        used.dedup();
        prop_assert!(canon.registry.len() <= bound, "{} events > bound {bound}", canon.registry.len());
        prop_assert!(used.len() <= bound);
        Ok(())
    });
    match result {
        Ok(()) => verdict(true, "200/200 fixtures within min(K_max, M)"),
        Err(e) => verdict(false, format!("{e}")),
    }
}

/// Answers matcher prompts from a fixed script; embeds everything identically
/// so every registered event is always a candidate.
struct ScriptedMatcher {
    answers: Mutex<VecDeque<&'static str>>,
    non_zero_temperature: Mutex<usize>,
}

impl Provider for ScriptedMatcher {
    fn chat(&self, req: &ChatRequest) -> causal_elicit::Result<String> {
        assert!(req.system.starts_with(prompts::MATCHER_SYSTEM_PREFIX));
        if req.temperature != 0.0 {
            *self.non_zero_temperature.lock().unwrap() += 1;
        }
        let next = self.answers.lock().unwrap().pop_front().expect("script exhausted");
        Ok(next.to_string())
    }

    fn embed(&self, texts: &[String]) -> causal_elicit::Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|_| vec![1.0, 0.0]).collect())
    }

    fn chat_model(&self) -> &str {
        "scripted"
    }
}

// 9. Renames mid-run leave no stale names anywhere.
fn rename_sweep() -> Verdict {
    let script = [
        r#"{"match": false}"#,
        r#"{"match": true, "canon_id": 0, "name": "alpha moves up"}"#,
        r#"{"match": true, "canon_id": 1, "name": "beta falls"}"#,
        r#"{"match": true, "canon_id": 0, "name": "alpha rally"}"#,
        r#"{"match": true, "canon_id": 1, "name": "beta decline"}"#,
    ];
    let provider = ScriptedMatcher {
        answers: Mutex::new(script.into_iter().collect()),
        non_zero_temperature: Mutex::new(0),
    };
    let gw = Gateway::with_provider(Box::new(provider), 1, 128);
    let docs: [&[&str]; 4] = [
        &["alpha rises", "beta falls"],
        &["alpha climbs", "beta drops"],
        &["alpha surges", "beta falls", "   "],
        &["gamma"],
    ];
    let records: Vec<EventRecord> = docs
        .iter()
        .enumerate()
        .map(|(doc_id, m)| EventRecord {
            doc_id,
            mentions: m.iter().map(|s| s.to_string()).collect(),
        })
        .collect();
    let out = canonicalize_incremental(&gw, &records, &IncrementalOptions::default()).unwrap();
    let expected: Vec<Vec<&str>> = vec![
        vec!["alpha rally", "beta decline"],
        vec!["alpha rally", "beta decline"],
        vec!["alpha rally", "beta decline", ""],
        vec!["beta decline"],
    ];
    let got: Vec<Vec<&str>> = out
        .records
        .iter()
        .map(|r| r.mentions.iter().map(String::as_str).collect())
        .collect();
    let stale = ["alpha rises", "alpha moves up", "beta falls"];
    let stale_hits = got.iter().flatten().filter(|m| stale.contains(m)).count();
    let names = out.registry.names();
    verdict(
        got == expected && stale_hits == 0 && names == ["alpha rally", "beta decline"] && gw.chat_calls() == 5,
        format!(
            "{stale_hits} stale names across {} rewritten lists, {} matcher calls, final names {names:?}",
            got.len(),
            gw.chat_calls()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "oracle PC equals the true CPDAG on every DAG with <= 4 nodes", oracle_pc),
        ("2", "XOR collider recovered by PC and GES in >= 95/100 seeds", xor_collider),
        ("2+", "supplementary: OR collider, same protocol", or_collider),
        ("3", "G2 hand check on identical balanced columns", gsq_hand_check),
        ("4", "DirectLiNGAM pair weight and chain root order", lingam_recovery),
        ("5", "OR-merge equals the brute-force oracle on 1000 instances", or_merge_oracle),
        ("6", "default configuration recorded in the manifest", config_snapshot),
        ("7", "two seeded mock runs give byte-identical artifacts", determinism),
        ("8", "canonical vocabulary size <= min(K_max, M)", vocabulary_bound),
        ("9", "incremental renames leave zero stale names", rename_sweep),
    ];
    let mut unexpected = Vec::new();
    for (id, title, check) in criteria {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {title}: {}", v.detail);
        if !v.pass {
            match KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("     known unattainable: {why}"),
                None => unexpected.push(id),
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures in {unexpected:?}");
        ExitCode::FAILURE
    }
}
