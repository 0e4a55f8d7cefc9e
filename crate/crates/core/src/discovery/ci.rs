//! Conditional independence tests for binary data, and a d-separation
//! oracle over a known DAG.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::graph::{reachable, Dag};
use crate::error::{Error, Result};

/// Strata with fewer samples than this carry no weight.
pub const MIN_STRATUM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiStatistic {
    /// Likelihood-ratio G².
    #[default]
    GSquared,
    /// Pearson's X².
    PearsonChi2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub independent: bool,
    /// The statistic (G² or X²), summed over usable strata.
    pub statistic: f64,
    pub dof: usize,
    pub p: f64,
}

fn check_vars(n_vars: usize, i: usize, j: usize, s: &[usize]) -> Result<()> {
    if i >= n_vars || j >= n_vars || s.iter().any(|&k| k >= n_vars) {
        return Err(Error::BadVars(format!("index out of range for {n_vars} variables")));
    }
    if i == j {
        return Err(Error::BadVars(format!("i == j == {i}")));
    }
    if s.contains(&i) || s.contains(&j) {
        return Err(Error::BadVars(format!("conditioning set {s:?} contains {i} or {j}")));
    }
    Ok(())
}

/// G² test of `i ⊥ j | s` over binary columns.
pub fn gsq_ci_test(cols: &[Vec<u8>], i: usize, j: usize, s: &[usize], alpha: f64) -> Result<CiResult> {
    ci_test(cols, i, j, s, alpha, CiStatistic::GSquared)
}

/// Stratified 2×2 contingency test of `i ⊥ j | s`.
///
/// Each configuration of `s` is a stratum. Strata with fewer than
/// [`MIN_STRATUM`] rows are skipped, and degrees of freedom count only rows
/// and columns with positive margins. With no degrees of freedom left the
/// pair is reported independent.
pub fn ci_test(
    cols: &[Vec<u8>],
    i: usize,
    j: usize,
    s: &[usize],
    alpha: f64,
    statistic: CiStatistic,
) -> Result<CiResult> {
    check_vars(cols.len(), i, j, s)?;
    if s.len() >= usize::BITS as usize - 1 {
        return Err(Error::BadVars(format!("conditioning set of size {} is too large", s.len())));
    }
    let n = cols[i].len();
    let mut tables = vec![[[0usize; 2]; 2]; 1 << s.len()];
    for row in 0..n {
        let mut stratum = 0;
        for (bit, &k) in s.iter().enumerate() {
            stratum |= (cols[k][row] as usize & 1) << bit;
        }
        tables[stratum][cols[i][row] as usize & 1][cols[j][row] as usize & 1] += 1;
    }

    let mut stat = 0.0;
    let mut dof = 0;
    for t in &tables {
        let total: usize = t.iter().flatten().sum();
        if total < MIN_STRATUM {
            continue;
        }
        let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
        let colm = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
        let r = rows.iter().filter(|&&v| v > 0).count();
        let c = colm.iter().filter(|&&v| v > 0).count();
        let d = (r - 1) * (c - 1);
        if d == 0 {
            continue;
        }
        dof += d;
        for a in 0..2 {
            for b in 0..2 {
                let e = (rows[a] * colm[b]) as f64 / total as f64;
                if e == 0.0 {
                    continue;
                }
                let o = t[a][b] as f64;
                stat += match statistic {
                    CiStatistic::GSquared if o > 0.0 => 2.0 * o * (o / e).ln(),
                    CiStatistic::GSquared => 0.0,
                    CiStatistic::PearsonChi2 => (o - e) * (o - e) / e,
                };
            }
        }
    }

    if dof == 0 {
        return Ok(CiResult {
            independent: true,
            statistic: 0.0,
            dof: 0,
            p: 1.0,
        });
    }
    let stat = stat.max(0.0);
    let chi = ChiSquared::new(dof as f64).expect("positive dof");
    let p = chi.sf(stat);
    Ok(CiResult {
        independent: p > alpha,
        statistic: stat,
        dof,
        p,
    })
}

/// Source of conditional independence judgements for PC.
pub trait CiTest {
    fn n_vars(&self) -> usize;
    fn independent(&self, i: usize, j: usize, s: &[usize]) -> Result<bool>;
}

/// Data-driven test over binary columns.
#[derive(Debug, Clone)]
pub struct DataCiTest<'a> {
    pub cols: &'a [Vec<u8>],
    pub alpha: f64,
    pub statistic: CiStatistic,
}

impl<'a> DataCiTest<'a> {
    pub fn new(cols: &'a [Vec<u8>], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must be in (0, 1), got {alpha}")));
        }
        Ok(Self {
            cols,
            alpha,
            statistic: CiStatistic::GSquared,
        })
    }

    pub fn with_statistic(mut self, statistic: CiStatistic) -> Self {
        self.statistic = statistic;
        self
    }
}

impl CiTest for DataCiTest<'_> {
    fn n_vars(&self) -> usize {
        self.cols.len()
    }

    fn independent(&self, i: usize, j: usize, s: &[usize]) -> Result<bool> {
        Ok(ci_test(self.cols, i, j, s, self.alpha, self.statistic)?.independent)
    }
}

/// Exact answers from a ground-truth DAG.
#[derive(Debug, Clone)]
pub struct DSeparation {
    pub dag: Dag,
}

impl DSeparation {
    pub fn new(dag: Dag) -> Self {
        Self { dag }
    }

    /// d-separation via the moralized ancestral graph of `{i, j} ∪ s`.
    pub fn d_separated(&self, i: usize, j: usize, s: &[usize]) -> bool {
        let n = self.dag.n_vars();
        let mut anc = vec![false; n];
        let mut stack: Vec<usize> = [i, j].iter().chain(s).copied().collect();
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut anc[v], true) {
                stack.extend(self.dag.parents(v));
            }
        }
        let mut moral = vec![vec![false; n]; n];
        for v in (0..n).filter(|&v| anc[v]) {
            let pa = self.dag.parents(v);
            for &p in &pa {
                moral[p][v] = true;
                moral[v][p] = true;
            }
            for (x, &a) in pa.iter().enumerate() {
                for &b in &pa[x + 1..] {
                    moral[a][b] = true;
                    moral[b][a] = true;
                }
            }
        }
        let blocked = |v: usize| !anc[v] || s.contains(&v);
        !reachable(n, i, |u, v| moral[u][v] && !blocked(v))[j]
    }
}

impl CiTest for DSeparation {
    fn n_vars(&self) -> usize {
        self.dag.n_vars()
    }

    fn independent(&self, i: usize, j: usize, s: &[usize]) -> Result<bool> {
        check_vars(self.n_vars(), i, j, s)?;
        Ok(self.d_separated(i, j, s))
    }
}

/// Either a data-driven test or a d-separation oracle.
#[derive(Debug, Clone)]
pub enum CiOracle<'a> {
    DataGsq(DataCiTest<'a>),
    SyntheticDag(DSeparation),
}

impl CiTest for CiOracle<'_> {
    fn n_vars(&self) -> usize {
        match self {
            CiOracle::DataGsq(t) => t.n_vars(),
            CiOracle::SyntheticDag(t) => t.n_vars(),
        }
    }

    fn independent(&self, i: usize, j: usize, s: &[usize]) -> Result<bool> {
        match self {
            CiOracle::DataGsq(t) => t.independent(i, j, s),
            CiOracle::SyntheticDag(t) => t.independent(i, j, s),
        }
    }
}
