use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed acyclic graph over `0..n`, used as ground truth and as the
/// consistent extension of a CPDAG.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Dag {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    /// Builds a DAG from `(from, to)` pairs, rejecting cycles.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::BadVars(format!("edge ({a}, {b}) on {n} nodes")));
            }
            g.adj[a][b] = true;
        }
        if g.topological_order().is_none() {
            return Err(Error::InvalidInput("edge list contains a cycle".into()));
        }
        Ok(g)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a][b] = true;
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.adj[u][v]).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.adj[v][u]).collect()
    }

    /// Kahn's algorithm, lowest index first; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|v| self.parents(v).len()).collect();
        let mut ready: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(pos) = ready.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i) {
            let v = ready.swap_remove(pos);
            order.push(v);
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    /// The CPDAG of this DAG's Markov equivalence class: skeleton plus
    /// v-structures, completed by the Meek rules.
    pub fn to_cpdag(&self, labels: &[String]) -> Cpdag {
        let mut g = Cpdag::new(labels.to_vec());
        for (a, b) in self.edges() {
            g.add_undirected(a, b);
        }
        for b in 0..self.n {
            let pa = self.parents(b);
            for (x, &a) in pa.iter().enumerate() {
                for &c in &pa[x + 1..] {
                    if !self.adj[a][c] && !self.adj[c][a] {
                        g.orient(a, b);
                        g.orient(c, b);
                    }
                }
            }
        }
        super::meek::meek_orient(&g)
    }
}

/// Partially directed graph over labelled variables. Each adjacent pair is
/// either one directed edge or one undirected edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpdag {
    labels: Vec<String>,
    directed: Vec<Vec<bool>>,
    undirected: Vec<Vec<bool>>,
}

impl Cpdag {
    /// Empty graph.
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            directed: vec![vec![false; n]; n],
            undirected: vec![vec![false; n]; n],
        }
    }

    /// Fully connected undirected graph.
    pub fn complete(labels: Vec<String>) -> Self {
        let mut g = Self::new(labels);
        let n = g.n_vars();
        for a in 0..n {
            for b in a + 1..n {
                g.add_undirected(a, b);
            }
        }
        g
    }

    pub fn n_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.directed[a][b] || self.directed[b][a] || self.undirected[a][b]
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.directed[a][b]
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected[a][b]
    }

    pub fn add_directed(&mut self, a: usize, b: usize) {
        self.remove_edge(a, b);
        self.directed[a][b] = true;
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) {
        self.remove_edge(a, b);
        self.undirected[a][b] = true;
        self.undirected[b][a] = true;
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.directed[a][b] = false;
        self.directed[b][a] = false;
        self.undirected[a][b] = false;
        self.undirected[b][a] = false;
    }

    /// Turns an existing undirected edge `a – b` into `a → b`.
    pub fn orient(&mut self, a: usize, b: usize) {
        if self.undirected[a][b] {
            self.add_directed(a, b);
        }
    }

    /// Nodes joined to `v` by an undirected edge.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n_vars()).filter(|&u| self.undirected[v][u]).collect()
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.n_vars()).filter(|&u| self.directed[u][v]).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n_vars()).filter(|&u| self.directed[v][u]).collect()
    }

    pub fn adjacents(&self, v: usize) -> Vec<usize> {
        (0..self.n_vars()).filter(|&u| self.is_adjacent(v, u)).collect()
    }

    /// `(from, to)` pairs in index order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_vars();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.directed[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Undirected pairs `(a, b)` with `a < b`, in index order.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_vars();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.undirected[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.directed_edges().len() + self.undirected_edges().len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count() == 0
    }

    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let n = self.n_vars();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.is_adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// True when the directed part has no cycle.
    pub fn directed_part_is_acyclic(&self) -> bool {
        let n = self.n_vars();
        let mut d = Dag::new(n);
        for (a, b) in self.directed_edges() {
            d.add_edge(a, b);
        }
        d.topological_order().is_some()
    }

    /// Colliders `a → b ← c` with `a`, `c` nonadjacent, as `(a, b, c)` with `a < c`.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.n_vars() {
            let pa = self.parents(b);
            for (i, &a) in pa.iter().enumerate() {
                for &c in &pa[i + 1..] {
                    if !self.is_adjacent(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// Renames variables: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Cpdag {
        let n = self.n_vars();
        let mut labels = vec![String::new(); n];
        for i in 0..n {
            labels[perm[i]] = self.labels[i].clone();
        }
        let mut g = Cpdag::new(labels);
        for (a, b) in self.directed_edges() {
            g.add_directed(perm[a], perm[b]);
        }
        for (a, b) in self.undirected_edges() {
            g.add_undirected(perm[a], perm[b]);
        }
        g
    }

    /// A DAG in the class (Dor–Tarsi). `None` if the PDAG admits no
    /// consistent extension.
    pub fn consistent_extension(&self) -> Option<Dag> {
        let n = self.n_vars();
        let mut work = self.clone();
        let mut alive = vec![true; n];
        let mut dag = Dag::new(n);
        for (a, b) in self.directed_edges() {
            dag.add_edge(a, b);
        }
        for _ in 0..n {
            // a sink whose undirected neighbours are adjacent to all its other adjacents
            let pick = (0..n).find(|&x| {
                alive[x]
                    && work.children(x).is_empty()
                    && work.neighbors(x).iter().all(|&y| {
                        work.adjacents(x)
                            .iter()
                            .all(|&z| z == y || work.is_adjacent(y, z))
                    })
            })?;
            for y in work.neighbors(pick) {
                dag.add_edge(y, pick);
            }
            for y in work.adjacents(pick) {
                work.remove_edge(pick, y);
            }
            alive[pick] = false;
        }
        dag.topological_order().map(|_| dag)
    }
}

/// Linear SEM estimate: a causal order plus weights `b[i][j]` for `j → i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDag {
    pub labels: Vec<String>,
    pub order: Vec<usize>,
    pub b: Vec<Vec<f64>>,
}

impl WeightedDag {
    pub fn n_vars(&self) -> usize {
        self.labels.len()
    }

    /// Nonzero `(from, to, weight)` triples in index order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_vars();
        let mut out = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if self.b[to][from] != 0.0 {
                    out.push((from, to, self.b[to][from]));
                }
            }
        }
        out
    }

    /// Position of each variable within `order`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.n_vars()];
        for (r, &v) in self.order.iter().enumerate() {
            rank[v] = r;
        }
        rank
    }

    /// Checks that `order` is a permutation and `b` is strictly lower
    /// triangular under it.
    pub fn check(&self) -> Result<()> {
        let n = self.n_vars();
        let mut seen = vec![false; n];
        for &v in &self.order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidInput(format!("order {:?} is not a permutation", self.order)));
            }
        }
        if self.order.len() != n || self.b.len() != n || self.b.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("weighted DAG shape mismatch".into()));
        }
        let rank = self.ranks();
        for (from, to, w) in self.edges() {
            if rank[from] >= rank[to] {
                return Err(Error::InvalidInput(format!(
                    "weight {w} on {from} -> {to} violates the causal order"
                )));
            }
        }
        Ok(())
    }
}

/// Breadth-first reachability from `start` along edges accepted by `step`.
pub(crate) fn reachable(n: usize, start: usize, mut step: impl FnMut(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for (v, seen_v) in seen.iter_mut().enumerate() {
            if !*seen_v && step(u, v) {
                *seen_v = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn cycle_rejected() {
        assert!(Dag::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Dag::from_edges(3, &[(0, 1), (1, 2)]).is_ok());
    }

    #[test]
    fn collider_cpdag_keeps_arrows() {
        let d = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let g = d.to_cpdag(&labels(3));
        assert_eq!(g.directed_edges(), vec![(0, 2), (1, 2)]);
        assert!(g.undirected_edges().is_empty());
    }

    #[test]
    fn chain_cpdag_is_undirected() {
        let d = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let g = d.to_cpdag(&labels(3));
        assert!(g.directed_edges().is_empty());
        assert_eq!(g.undirected_edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn extension_stays_in_class() {
        let d = Dag::from_edges(4, &[(0, 1), (1, 2), (3, 2), (0, 3)]).unwrap();
        let g = d.to_cpdag(&labels(4));
        let ext = g.consistent_extension().unwrap();
        assert_eq!(ext.to_cpdag(&labels(4)), g);
    }

    #[test]
    fn weighted_dag_check() {
        let w = WeightedDag {
            labels: labels(2),
            order: vec![1, 0],
            b: vec![vec![0.0, 0.5], vec![0.0, 0.0]],
        };
        assert!(w.check().is_ok());
        assert_eq!(w.edges(), vec![(1, 0, 0.5)]);
        let bad = WeightedDag { order: vec![0, 1], ..w };
        assert!(bad.check().is_err());
    }
}
