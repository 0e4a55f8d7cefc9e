//! Test oracles written independently of the library's own algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use causal_elicit::discovery::{CiTest, Cpdag};
use causal_elicit::Result;

pub type Edges = Vec<(usize, usize)>;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    // repeatedly strip sinks
    let mut alive = vec![true; n];
    for _ in 0..n {
        let sink = (0..n).find(|&v| alive[v] && !edges.iter().any(|&(a, b)| a == v && alive[b]));
        match sink {
            Some(v) => alive[v] = false,
            None => return false,
        }
    }
    true
}

/// Every DAG on `n` labelled nodes: each unordered pair is absent, `a→b` or `b→a`.
pub fn all_dags(n: usize) -> Vec<Edges> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match c % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        if is_acyclic(n, &edges) {
            out.push(edges);
        }
    }
    out
}

fn adjacent(edges: &[(usize, usize)], a: usize, b: usize) -> bool {
    edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
}

pub type Signature = (BTreeSet<(usize, usize)>, BTreeSet<(usize, usize, usize)>);

/// (skeleton as sorted pairs, v-structures as (a, c, b) with a < b).
pub fn signature(n: usize, edges: &[(usize, usize)]) -> Signature {
    let skel = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut vs = BTreeSet::new();
    for c in 0..n {
        let pa: Vec<usize> = edges.iter().filter(|e| e.1 == c).map(|e| e.0).collect();
        for (i, &a) in pa.iter().enumerate() {
            for &b in &pa[i + 1..] {
                if !adjacent(edges, a, b) {
                    vs.insert((a.min(b), c, a.max(b)));
                }
            }
        }
    }
    (skel, vs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSets {
    pub directed: BTreeSet<(usize, usize)>,
    pub undirected: BTreeSet<(usize, usize)>,
}

impl EdgeSets {
    pub fn of(g: &Cpdag) -> Self {
        Self {
            directed: g.directed_edges().into_iter().collect(),
            undirected: g.undirected_edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect(),
        }
    }
}

/// Essential graph by definition: an edge is directed iff every member of
/// the equivalence class orients it the same way.
pub fn essential_graph(n: usize, dag: &[(usize, usize)], universe: &[Edges]) -> EdgeSets {
    let sig = signature(n, dag);
    let class: Vec<&Edges> = universe.iter().filter(|d| signature(n, d) == sig).collect();
    let mut out = EdgeSets {
        directed: BTreeSet::new(),
        undirected: BTreeSet::new(),
    };
    for &(a, b) in &sig.0 {
        let fwd = class.iter().filter(|d| d.contains(&(a, b))).count();
        if fwd == class.len() {
            out.directed.insert((a, b));
        } else if fwd == 0 {
            out.directed.insert((b, a));
        } else {
            out.undirected.insert((a, b));
        }
    }
    out
}

/// d-separation by enumerating every simple path of the skeleton.
pub struct PathOracle {
    pub n: usize,
    pub edges: Edges,
}

impl PathOracle {
    fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                if a == u && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    }

    fn active(&self, path: &[usize], s: &[usize]) -> bool {
        path.windows(3).all(|w| {
            let (a, m, b) = (w[0], w[1], w[2]);
            let collider = self.edges.contains(&(a, m)) && self.edges.contains(&(b, m));
            if collider {
                self.descendants(m).iter().any(|d| s.contains(d))
            } else {
                !s.contains(&m)
            }
        })
    }

    fn search(&self, path: &mut Vec<usize>, target: usize, s: &[usize]) -> bool {
        let last = *path.last().unwrap();
        if last == target {
            return self.active(path, s);
        }
        for v in 0..self.n {
            if !path.contains(&v) && adjacent(&self.edges, last, v) {
                path.push(v);
                let hit = self.search(path, target, s);
                path.pop();
                if hit {
                    return true;
                }
            }
        }
        false
    }

    pub fn d_separated(&self, i: usize, j: usize, s: &[usize]) -> bool {
        !self.search(&mut vec![i], j, s)
    }
}

impl CiTest for PathOracle {
    fn n_vars(&self) -> usize {
        self.n
    }

    fn independent(&self, i: usize, j: usize, s: &[usize]) -> Result<bool> {
        Ok(self.d_separated(i, j, s))
    }
}

/// A parsed DOT graph: node ids, and edges with their attribute maps.
#[derive(Debug, Default, PartialEq)]
pub struct DotGraph {
    pub directed: bool,
    pub name: Option<String>,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Line,
    Sym(char),
}

fn lex(src: &str) -> std::result::Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Tok::Arrow);
            i += 2;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            out.push(Tok::Line);
            i += 2;
        } else if "{}[];,=".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some(&o) => {
                                s.push('\\');
                                s.push(o);
                            }
                            None => return Err("dangling escape".into()),
                        }
                        i += 2;
                        continue;
                    }
                    Some(&o) => s.push(o),
                }
                i += 1;
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let start = i;
            if c == '-' {
                i += 1;
            }
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            if i == start || (c == '-' && i == start + 1) {
                return Err(format!("bad character {c:?}"));
            }
            out.push(Tok::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?} at {i}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), String> {
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            other => Err(format!("expected {c:?}, got {other:?}")),
        }
    }

    fn id(&mut self) -> std::result::Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            other => Err(format!("expected identifier, got {other:?}")),
        }
    }

    fn attrs(&mut self) -> std::result::Result<BTreeMap<String, String>, String> {
        let mut out = BTreeMap::new();
        while self.peek() == Some(&Tok::Sym('[')) {
            self.next();
            while self.peek() != Some(&Tok::Sym(']')) {
                let k = self.id()?;
                self.expect('=')?;
                let v = self.id()?;
                out.insert(k, v);
                if matches!(self.peek(), Some(Tok::Sym(',' | ';'))) {
                    self.next();
                }
            }
            self.expect(']')?;
        }
        Ok(out)
    }
}

/// Parses the node/edge subset of the DOT language (no subgraphs or ports).
pub fn parse_dot(src: &str) -> std::result::Result<DotGraph, String> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let mut g = DotGraph::default();
    let mut kw = p.id()?;
    if kw.eq_ignore_ascii_case("strict") {
        kw = p.id()?;
    }
    g.directed = match kw.to_ascii_lowercase().as_str() {
        "digraph" => true,
        "graph" => false,
        other => return Err(format!("expected graph keyword, got {other:?}")),
    };
    if let Some(Tok::Id(_)) = p.peek() {
        g.name = Some(p.id()?);
    }
    p.expect('{')?;
    loop {
        match p.peek() {
            Some(Tok::Sym('}')) => {
                p.next();
                break;
            }
            Some(Tok::Sym(';')) => {
                p.next();
            }
            Some(Tok::Id(_)) => {
                let a = p.id()?;
                let op = p.peek().cloned();
                match op {
                    Some(Tok::Arrow) | Some(Tok::Line) => {
                        if (op == Some(Tok::Arrow)) != g.directed {
                            return Err("edge operator does not match graph kind".into());
                        }
                        let mut chain = vec![a];
                        while matches!(p.peek(), Some(Tok::Arrow | Tok::Line)) {
                            p.next();
                            chain.push(p.id()?);
                        }
                        let attrs = p.attrs()?;
                        for w in chain.windows(2) {
                            g.edges.push((w[0].clone(), w[1].clone(), attrs.clone()));
                        }
                    }
                    Some(Tok::Sym('=')) => {
                        p.next();
                        p.id()?;
                    }
                    _ => {
                        let is_keyword = ["graph", "node", "edge"].contains(&a.to_ascii_lowercase().as_str());
                        p.attrs()?;
                        if !is_keyword {
                            g.nodes.push(a);
                        }
                    }
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    if p.peek().is_some() {
        return Err("trailing tokens after closing brace".into());
    }
    Ok(g)
}
