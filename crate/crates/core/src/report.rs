//! DOT export and the Markdown run report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canonicalize::CanonicalEvent;
use crate::discovery::{Cpdag, WeightedDag};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::pipeline::RunManifest;

/// The three candidate graphs of one run, over a shared label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBundle {
    pub labels: Vec<String>,
    pub pc: Cpdag,
    pub ges: Cpdag,
    pub lingam: WeightedDag,
}

impl GraphBundle {
    pub fn new(pc: Cpdag, ges: Cpdag, lingam: WeightedDag) -> Result<Self> {
        let labels = pc.labels().to_vec();
        if ges.labels() != labels.as_slice() || lingam.labels != labels {
            return Err(Error::InvalidInput("graphs in a bundle must share one label set".into()));
        }
        Ok(Self { labels, pc, ges, lingam })
    }
}

pub(crate) fn quote(label: &str) -> String {
    let mut out = String::with_capacity(label.len() + 2);
    out.push('"');
    for ch in label.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One rendered edge: `(source, target, attribute)`.
type DotEdge<'a> = (&'a str, &'a str, Option<String>);

fn render(name: &str, labels: &[String], mut edges: Vec<DotEdge<'_>>) -> String {
    let mut nodes: Vec<&str> = labels.iter().map(String::as_str).collect();
    nodes.sort_unstable();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = format!("digraph {name} {{\n");
    for n in nodes {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for (a, b, attr) in edges {
        let _ = match attr {
            Some(attr) => writeln!(out, "  {} -> {} [{attr}];", quote(a), quote(b)),
            None => writeln!(out, "  {} -> {};", quote(a), quote(b)),
        };
    }
    out.push_str("}\n");
    out
}

/// Graphs that can be written as DOT.
pub trait ToDot {
    fn to_dot(&self) -> String;
}

impl ToDot for Cpdag {
    /// Directed edges as `a -> b`, undirected ones as `a -> b [dir=none]`
    /// with the lexically smaller label first.
    fn to_dot(&self) -> String {
        let l = self.labels();
        let mut edges: Vec<DotEdge<'_>> = self
            .directed_edges()
            .into_iter()
            .map(|(a, b)| (l[a].as_str(), l[b].as_str(), None))
            .collect();
        for (a, b) in self.undirected_edges() {
            let (a, b) = if l[a] <= l[b] { (a, b) } else { (b, a) };
            edges.push((&l[a], &l[b], Some("dir=none".into())));
        }
        render("G", l, edges)
    }
}

impl ToDot for WeightedDag {
    /// Edges labelled with their weight to two decimals.
    fn to_dot(&self) -> String {
        let l = &self.labels;
        let edges = self
            .edges()
            .into_iter()
            .map(|(from, to, w)| (l[from].as_str(), l[to].as_str(), Some(format!("label=\"{w:.2}\""))))
            .collect();
        render("G", l, edges)
    }
}

pub fn to_dot(g: &impl ToDot) -> String {
    g.to_dot()
}

fn cpdag_edge_lines(g: &Cpdag) -> Vec<String> {
    let l = g.labels();
    let mut lines: Vec<String> = g
        .directed_edges()
        .into_iter()
        .map(|(a, b)| format!("{} → {}", l[a], l[b]))
        .collect();
    for (a, b) in g.undirected_edges() {
        let (a, b) = if l[a] <= l[b] { (a, b) } else { (b, a) };
        lines.push(format!("{} -- {}", l[a], l[b]));
    }
    lines.sort();
    lines
}

fn push_list(out: &mut String, lines: &[String]) {
    if lines.is_empty() {
        out.push_str("(no edges)\n");
    }
    for line in lines {
        let _ = writeln!(out, "- {line}");
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Renders `report.md`.
pub fn render_report(bundle: &GraphBundle, manifest: &RunManifest, events: &[CanonicalEvent]) -> String {
    let p = &manifest.params;
    let mut out = String::new();
    let _ = writeln!(out, "# Causal elicitation report: {}\n", manifest.topic.text);

    out.push_str("## Canonical events\n\n| ID | Event |\n|---:|---|\n");
    for e in events {
        let _ = writeln!(out, "| {} | {} |", e.canon_id + 1, cell(&e.name));
    }

    let (rows, cols) = manifest.matrix_shape.unwrap_or((0, bundle.labels.len()));
    let _ = writeln!(
        out,
        "\n## Matrix\n\n{rows} documents × {cols} events ({} canonical events, {} constant columns dropped)\n",
        events.len(),
        manifest.dropped_columns.len()
    );

    let _ = writeln!(out, "## PC (α = {}, max_cond = {})\n", p.alpha, p.max_cond);
    push_list(&mut out, &cpdag_edge_lines(&bundle.pc));

    let _ = writeln!(out, "\n## GES ({})\n", p.score_label());
    push_list(&mut out, &cpdag_edge_lines(&bundle.ges));

    out.push_str("\n## LiNGAM (DirectLiNGAM)\n\n");
    out.push_str("Binary columns are treated as continuous, which violates the model's assumptions.\n\n");
    let l = &bundle.lingam.labels;
    let mut lines: Vec<String> = bundle
        .lingam
        .edges()
        .into_iter()
        .map(|(a, b, w)| format!("{} → {} ({w:.2})", l[a], l[b]))
        .collect();
    lines.sort();
    push_list(&mut out, &lines);

    out.push_str("\n## Dropped columns\n\n");
    if manifest.dropped_columns.is_empty() {
        out.push_str("(none)\n");
    }
    for d in &manifest.dropped_columns {
        let _ = writeln!(out, "- {} ({})", d.label, d.reason);
    }
    out
}

/// Writes `graphs/{pc,ges,lingam}.dot` and `report.md` under `dir`.
pub fn write_report(
    bundle: &GraphBundle,
    manifest: &RunManifest,
    events: &[CanonicalEvent],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let graphs = dir.join("graphs");
    let files = [
        (graphs.join("pc.dot"), bundle.pc.to_dot()),
        (graphs.join("ges.dot"), bundle.ges.to_dot()),
        (graphs.join("lingam.dot"), bundle.lingam.to_dot()),
        (dir.join("report.md"), render_report(bundle, manifest, events)),
    ];
    let mut paths = Vec::new();
    for (path, text) in files {
        jsonl::write_atomic(&path, text.as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}
