use std::collections::BTreeMap;

use log::debug;

use super::ci::CiTest;
use super::graph::Cpdag;
use super::meek::meek_orient;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_COND: usize = 3;

/// PC output together with the separating sets found for removed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PcResult {
    pub cpdag: Cpdag,
    /// Keyed by `(i, j)` with `i < j`.
    pub sepsets: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Size-`k` subsets of `items` in lexicographic order.
pub(crate) fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..items.len() {
            if items.len() - x < k - cur.len() {
                break;
            }
            cur.push(items[x]);
            go(items, k, x + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn others(g: &Cpdag, v: usize, skip: usize) -> Vec<usize> {
    g.adjacents(v).into_iter().filter(|&u| u != skip).collect()
}

/// PC skeleton, v-structure orientation and Meek completion.
///
/// Edge removal updates adjacencies immediately, with pairs visited in
/// ascending index order and conditioning subsets in lexicographic order.
/// A v-structure proposal that conflicts with another leaves the edge
/// undirected.
pub fn pc(test: &dyn CiTest, labels: &[String], max_cond: usize) -> Result<PcResult> {
    let n = test.n_vars();
    if n < 2 {
        return Err(Error::DegenerateMatrix(format!("PC needs at least 2 variables, got {n}")));
    }
    if labels.len() != n {
        return Err(Error::InvalidInput(format!("{} labels for {n} variables", labels.len())));
    }
    let mut g = Cpdag::complete(labels.to_vec());
    let mut sepsets = BTreeMap::new();

    for level in 0..=max_cond {
        let mut any_testable = false;
        for i in 0..n {
            for j in i + 1..n {
                if !g.is_adjacent(i, j) {
                    continue;
                }
                'pair: for (x, y) in [(i, j), (j, i)] {
                    let adj = others(&g, x, y);
                    if adj.len() < level {
                        continue;
                    }
                    any_testable = true;
                    for s in subsets(&adj, level) {
                        if test.independent(i, j, &s)? {
                            debug!("removing {i} - {j} given {s:?}");
                            g.remove_edge(i, j);
                            sepsets.insert((i, j), s);
                            break 'pair;
                        }
                    }
                }
            }
        }
        if !any_testable {
            break;
        }
    }

    // v-structures; +1 for i → j, -1 for j → i, 0 for conflict
    let mut votes: BTreeMap<(usize, usize), i8> = BTreeMap::new();
    let mut vote = |from: usize, to: usize| {
        let (key, dir) = if from < to { ((from, to), 1) } else { ((to, from), -1) };
        votes
            .entry(key)
            .and_modify(|v| {
                if *v != dir {
                    *v = 0
                }
            })
            .or_insert(dir);
    };
    for i in 0..n {
        for k in i + 1..n {
            if g.is_adjacent(i, k) {
                continue;
            }
            let sep = sepsets.get(&(i, k)).map(Vec::as_slice).unwrap_or(&[]);
            for j in 0..n {
                if j != i && j != k && g.is_adjacent(i, j) && g.is_adjacent(k, j) && !sep.contains(&j) {
                    vote(i, j);
                    vote(k, j);
                }
            }
        }
    }
    for (&(a, b), &dir) in &votes {
        match dir {
            1 => g.orient(a, b),
            -1 => g.orient(b, a),
            _ => debug!("conflicting orientation on {a} - {b}; left undirected"),
        }
    }

    Ok(PcResult {
        cpdag: meek_orient(&g),
        sepsets,
    })
}
