use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreKind {
    #[default]
    BicMultinomial,
    Bdeu { equivalent_sample_size: f64 },
}

/// Decomposable score over binary columns, with per-(node, parents) memo.
/// Not shared across searches.
#[derive(Debug)]
pub struct DecomposableScore<'a> {
    kind: ScoreKind,
    cols: &'a [Vec<u8>],
    cache: RefCell<HashMap<(usize, Vec<usize>), f64>>,
}

impl<'a> DecomposableScore<'a> {
    pub fn new(kind: ScoreKind, cols: &'a [Vec<u8>]) -> Result<Self> {
        if let ScoreKind::Bdeu { equivalent_sample_size } = kind {
            if equivalent_sample_size.is_nan() || equivalent_sample_size <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "equivalent sample size must be positive, got {equivalent_sample_size}"
                )));
            }
        }
        if cols.len() > 1 && cols.iter().any(|c| c.len() != cols[0].len()) {
            return Err(Error::InvalidInput("columns differ in length".into()));
        }
        Ok(Self {
            kind,
            cols,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn n_vars(&self) -> usize {
        self.cols.len()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.borrow().len()
    }

    /// Local score of `node` given `parents` (order irrelevant).
    pub fn local_score(&self, node: usize, parents: &[usize]) -> f64 {
        let mut key = parents.to_vec();
        key.sort_unstable();
        key.dedup();
        debug_assert!(!key.contains(&node));
        if let Some(&v) = self.cache.borrow().get(&(node, key.clone())) {
            return v;
        }
        let v = self.compute(node, &key);
        self.cache.borrow_mut().insert((node, key), v);
        v
    }

    /// Sum of local scores of a DAG given as parent lists.
    pub fn total(&self, parents: &[Vec<usize>]) -> f64 {
        parents.iter().enumerate().map(|(v, pa)| self.local_score(v, pa)).sum()
    }

    fn compute(&self, node: usize, parents: &[usize]) -> f64 {
        let x = &self.cols[node];
        let n = x.len();
        let q = 1usize << parents.len();
        let mut counts = vec![[0usize; 2]; q];
        for row in 0..n {
            let mut cfg = 0;
            for (bit, &p) in parents.iter().enumerate() {
                cfg |= (self.cols[p][row] as usize & 1) << bit;
            }
            counts[cfg][x[row] as usize & 1] += 1;
        }
        match self.kind {
            ScoreKind::BicMultinomial => {
                let mut ll = 0.0;
                for c in &counts {
                    let tot = (c[0] + c[1]) as f64;
                    for &o in c {
                        if o > 0 {
                            let o = o as f64;
                            ll += o * (o / tot).ln();
                        }
                    }
                }
                ll - 0.5 * (n as f64).ln() * q as f64
            }
            ScoreKind::Bdeu { equivalent_sample_size: ess } => {
                let a_j = ess / q as f64;
                let a_jk = a_j / 2.0;
                counts
                    .iter()
                    .map(|c| {
                        let tot = (c[0] + c[1]) as f64;
                        ln_gamma(a_j) - ln_gamma(a_j + tot)
                            + c.iter().map(|&o| ln_gamma(a_jk + o as f64) - ln_gamma(a_jk)).sum::<f64>()
                    })
                    .sum()
            }
        }
    }
}
