//! Greedy equivalence search with the Insert/Delete operators on CPDAGs.

use log::debug;

use super::graph::{reachable, Cpdag, Dag};
use super::pc::subsets;
use super::score::{DecomposableScore, ScoreKind};
use crate::error::{Error, Result};

/// Improvements at or below this are treated as ties with doing nothing.
const MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GesResult {
    pub cpdag: Cpdag,
    pub score: f64,
    pub forward_moves: usize,
    pub backward_moves: usize,
    /// Total score of the empty graph followed by the score after each move.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Move {
    x: usize,
    y: usize,
    set: Vec<usize>,
    gain: f64,
}

fn union(a: &[usize], b: &[usize], extra: Option<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().chain(extra).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn is_clique(g: &Cpdag, nodes: &[usize]) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| g.is_adjacent(a, b)))
}

/// True if some path from `y` to `x` along `→` and `–` edges avoids `block`.
fn semi_directed_path(g: &Cpdag, y: usize, x: usize, block: &[usize]) -> bool {
    reachable(g.n_vars(), y, |u, v| {
        !block.contains(&v) && (g.has_directed(u, v) || g.has_undirected(u, v))
    })[x]
}

fn best_insert(g: &Cpdag, score: &DecomposableScore<'_>) -> Option<Move> {
    let n = g.n_vars();
    let mut best: Option<Move> = None;
    for x in 0..n {
        for y in 0..n {
            if x == y || g.is_adjacent(x, y) {
                continue;
            }
            let nbrs = g.neighbors(y);
            let na: Vec<usize> = nbrs.iter().copied().filter(|&t| g.is_adjacent(t, x)).collect();
            let free: Vec<usize> = nbrs.iter().copied().filter(|&t| !g.is_adjacent(t, x)).collect();
            let pa = g.parents(y);
            for k in 0..=free.len() {
                for t in subsets(&free, k) {
                    let s = union(&na, &t, None);
                    if !is_clique(g, &s) || semi_directed_path(g, y, x, &s) {
                        continue;
                    }
                    let base = union(&s, &pa, None);
                    let gain = score.local_score(y, &union(&base, &[], Some(x))) - score.local_score(y, &base);
                    if best.as_ref().is_none_or(|b| gain > b.gain) {
                        best = Some(Move { x, y, set: t, gain });
                    }
                }
            }
        }
    }
    best.filter(|m| m.gain > MIN_GAIN)
}

fn best_delete(g: &Cpdag, score: &DecomposableScore<'_>) -> Option<Move> {
    let n = g.n_vars();
    let mut best: Option<Move> = None;
    for x in 0..n {
        for y in 0..n {
            if !(g.has_directed(x, y) || g.has_undirected(x, y)) {
                continue;
            }
            let na: Vec<usize> = g.neighbors(y).into_iter().filter(|&h| g.is_adjacent(h, x)).collect();
            let pa: Vec<usize> = g.parents(y).into_iter().filter(|&p| p != x).collect();
            for k in 0..=na.len() {
                for h in subsets(&na, k) {
                    let rest: Vec<usize> = na.iter().copied().filter(|v| !h.contains(v)).collect();
                    if !is_clique(g, &rest) {
                        continue;
                    }
                    let base = union(&rest, &pa, None);
                    let gain = score.local_score(y, &base) - score.local_score(y, &union(&base, &[], Some(x)));
                    if best.as_ref().is_none_or(|b| gain > b.gain) {
                        best = Some(Move { x, y, set: h, gain });
                    }
                }
            }
        }
    }
    best.filter(|m| m.gain > MIN_GAIN)
}

fn complete(g: &Cpdag) -> Result<(Cpdag, Dag)> {
    let dag = g
        .consistent_extension()
        .ok_or_else(|| Error::InvalidInput("GES move produced a PDAG with no consistent extension".into()))?;
    Ok((dag.to_cpdag(g.labels()), dag))
}

fn dag_score(dag: &Dag, score: &DecomposableScore<'_>) -> f64 {
    let parents: Vec<Vec<usize>> = (0..dag.n_vars()).map(|v| dag.parents(v)).collect();
    score.total(&parents)
}

/// Runs the forward (insert) then backward (delete) phases from the empty
/// graph, taking the best-scoring operator each step. Among equal gains the
/// lowest `(x, y)` and then the first subset in lexicographic order wins.
pub fn ges(cols: &[Vec<u8>], labels: &[String], kind: ScoreKind) -> Result<GesResult> {
    let n = cols.len();
    if n < 2 {
        return Err(Error::DegenerateMatrix(format!("GES needs at least 2 variables, got {n}")));
    }
    if labels.len() != n {
        return Err(Error::InvalidInput(format!("{} labels for {n} variables", labels.len())));
    }
    let score = DecomposableScore::new(kind, cols)?;
    let mut g = Cpdag::new(labels.to_vec());
    let mut current = dag_score(&Dag::new(n), &score);
    let mut trace = vec![current];
    let mut forward_moves = 0;
    let mut backward_moves = 0;

    while let Some(m) = best_insert(&g, &score) {
        debug!("insert {} -> {} with T={:?}, gain {:.4}", m.x, m.y, m.set, m.gain);
        let mut next = g.clone();
        next.add_directed(m.x, m.y);
        for &t in &m.set {
            next.orient(t, m.y);
        }
        let (cpdag, dag) = complete(&next)?;
        g = cpdag;
        current = dag_score(&dag, &score);
        trace.push(current);
        forward_moves += 1;
    }

    while let Some(m) = best_delete(&g, &score) {
        debug!("delete {} - {} with H={:?}, gain {:.4}", m.x, m.y, m.set, m.gain);
        let mut next = g.clone();
        next.remove_edge(m.x, m.y);
        for &h in &m.set {
            next.orient(m.y, h);
            next.orient(m.x, h);
        }
        let (cpdag, dag) = complete(&next)?;
        g = cpdag;
        current = dag_score(&dag, &score);
        trace.push(current);
        backward_moves += 1;
    }

    Ok(GesResult {
        cpdag: g,
        score: current,
        forward_moves,
        backward_moves,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn independent_columns_give_empty_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cols: Vec<Vec<u8>> = (0..4).map(|_| (0..1000).map(|_| rng.random_bool(0.5) as u8).collect()).collect();
        let r = ges(&cols, &labels(4), ScoreKind::BicMultinomial).unwrap();
        assert!(r.cpdag.is_empty(), "{:?}", r.cpdag.skeleton());
    }

    #[test]
    fn two_dependent_columns_give_one_undirected_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a: Vec<u8> = (0..500).map(|_| rng.random_bool(0.5) as u8).collect();
        let b: Vec<u8> = a.iter().map(|&v| if rng.random_bool(0.1) { 1 - v } else { v }).collect();
        let r = ges(&[a, b], &labels(2), ScoreKind::BicMultinomial).unwrap();
        assert_eq!(r.cpdag.undirected_edges(), vec![(0, 1)]);
        assert!(r.cpdag.directed_edges().is_empty());
    }

    #[test]
    fn or_collider_is_oriented() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Vec<u8> = (0..2000).map(|_| rng.random_bool(0.5) as u8).collect();
        let y: Vec<u8> = (0..2000).map(|_| rng.random_bool(0.5) as u8).collect();
        let z: Vec<u8> = x.iter().zip(&y).map(|(&a, &b)| a | b).collect();
        let r = ges(&[x, y, z], &labels(3), ScoreKind::BicMultinomial).unwrap();
        assert_eq!(r.cpdag.directed_edges(), vec![(0, 2), (1, 2)]);
        assert!(r.cpdag.undirected_edges().is_empty());
    }

    #[test]
    fn trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let a: Vec<u8> = (0..400).map(|_| rng.random_bool(0.5) as u8).collect();
        let b: Vec<u8> = a.iter().map(|&v| if rng.random_bool(0.2) { 1 - v } else { v }).collect();
        let c: Vec<u8> = b.iter().map(|&v| if rng.random_bool(0.2) { 1 - v } else { v }).collect();
        let r = ges(&[a, b, c], &labels(3), ScoreKind::BicMultinomial).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert_eq!(r.cpdag.undirected_edges(), vec![(0, 1), (1, 2)]);
    }
}
