//! Linear non-Gaussian acyclic models: DirectLiNGAM and ICA-LiNGAM.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::WeightedDag;
use crate::error::{Error, Result};

pub const DEFAULT_PRUNE: f64 = 0.05;

/// Columns of the input matrix, one `Vec` per variable.
pub type Columns = [Vec<f64>];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LingamOptions {
    /// Weights with absolute value below this are zeroed.
    pub prune: f64,
}

impl Default for LingamOptions {
    fn default() -> Self {
        Self { prune: DEFAULT_PRUNE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcaOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub prune: f64,
}

impl Default for IcaOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-6,
            seed: 42,
            prune: DEFAULT_PRUNE,
        }
    }
}

/// ICA-LiNGAM estimate plus FastICA convergence status. A non-converged
/// run still returns its best-effort graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IcaLingamResult {
    pub dag: WeightedDag,
    pub converged: bool,
    /// Fixed-point iterations used per extracted component.
    pub iterations: Vec<usize>,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

fn centered(data: &Columns) -> Result<Vec<Vec<f64>>> {
    let p = data.len();
    if p < 2 {
        return Err(Error::DegenerateMatrix(format!("LiNGAM needs at least 2 columns, got {p}")));
    }
    let n = data[0].len();
    if n < 2 || data.iter().any(|c| c.len() != n) {
        return Err(Error::DegenerateMatrix("columns must share a length of at least 2".into()));
    }
    data.iter()
        .enumerate()
        .map(|(j, c)| {
            let m = mean(c);
            let out: Vec<f64> = c.iter().map(|v| v - m).collect();
            if std_dev(&out) < 1e-12 {
                return Err(Error::ConstantColumn(j));
            }
            Ok(out)
        })
        .collect()
}

fn standardize(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    let s = std_dev(x);
    let s = if s < 1e-12 { 1.0 } else { s };
    x.iter().map(|v| (v - m) / s).collect()
}

/// `xi` minus its least-squares projection on `xj`.
fn residual(xi: &[f64], xj: &[f64]) -> Vec<f64> {
    let mi = mean(xi);
    let mj = mean(xj);
    let cov: f64 = xi.iter().zip(xj).map(|(a, b)| (a - mi) * (b - mj)).sum();
    let var: f64 = xj.iter().map(|b| (b - mj) * (b - mj)).sum();
    let k = if var < 1e-300 { 0.0 } else { cov / var };
    xi.iter().zip(xj).map(|(a, b)| a - k * b).collect()
}

/// Maximum-entropy approximation of differential entropy for a
/// standardized sample.
fn entropy(u: &[f64]) -> f64 {
    const K1: f64 = 79.047;
    const K2: f64 = 7.4129;
    const GAMMA: f64 = 0.37457;
    let a = mean(&u.iter().map(|v| v.cosh().ln()).collect::<Vec<_>>()) - GAMMA;
    let b = mean(&u.iter().map(|v| v * (-v * v / 2.0).exp()).collect::<Vec<_>>());
    (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0 - K1 * a * a - K2 * b * b
}

/// Likelihood-ratio contrast; negative when `xj → xi` is the better fit.
fn diff_mutual_info(xi: &[f64], xj: &[f64]) -> f64 {
    let ri_j = standardize(&residual(xi, xj));
    let rj_i = standardize(&residual(xj, xi));
    (entropy(xj) + entropy(&ri_j)) - (entropy(xi) + entropy(&rj_i))
}

fn most_exogenous(x: &[Vec<f64>], remaining: &[usize]) -> usize {
    let std: Vec<Vec<f64>> = x.iter().map(|c| standardize(c)).collect();
    let mut best = (remaining[0], f64::INFINITY);
    for &i in remaining {
        let m: f64 = remaining
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| diff_mutual_info(&std[i], &std[j]).min(0.0).powi(2))
            .sum();
        if m < best.1 {
            best = (i, m);
        }
    }
    best.0
}

/// OLS coefficients of `y` on the columns `xs` (all centered).
fn ols(y: &[f64], xs: &[&[f64]]) -> Vec<f64> {
    let n = y.len();
    let a = DMatrix::from_fn(n, xs.len(), |r, c| xs[c][r]);
    let b = DVector::from_column_slice(y);
    a.svd(true, true)
        .solve(&b, 1e-12)
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; xs.len()])
}

fn weights_for_order(data: &[Vec<f64>], order: &[usize], prune: f64) -> Vec<Vec<f64>> {
    let p = data.len();
    let mut b = vec![vec![0.0; p]; p];
    for pos in 1..p {
        let target = order[pos];
        let preds = &order[..pos];
        let xs: Vec<&[f64]> = preds.iter().map(|&k| data[k].as_slice()).collect();
        for (&k, w) in preds.iter().zip(ols(&data[target], &xs)) {
            b[target][k] = if w.abs() < prune { 0.0 } else { w };
        }
    }
    b
}

/// DirectLiNGAM: repeatedly take the most exogenous variable under the
/// pairwise entropy contrast, regress it out of the rest, and finally
/// estimate weights by least squares on each variable's predecessors.
pub fn direct_lingam(data: &Columns, labels: &[String], opts: &LingamOptions) -> Result<WeightedDag> {
    let base = centered(data)?;
    check_labels(labels, base.len())?;
    let p = base.len();
    let mut x = base.clone();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut order = Vec::with_capacity(p);
    while remaining.len() > 1 {
        let m = most_exogenous(&x, &remaining);
        order.push(m);
        remaining.retain(|&v| v != m);
        for &i in &remaining {
            x[i] = residual(&x[i], &x[m]);
        }
    }
    order.push(remaining[0]);
    let b = weights_for_order(&base, &order, opts.prune);
    let dag = WeightedDag {
        labels: labels.to_vec(),
        order,
        b,
    };
    dag.check()?;
    Ok(dag)
}

fn check_labels(labels: &[String], p: usize) -> Result<()> {
    if labels.len() != p {
        return Err(Error::InvalidInput(format!("{} labels for {p} variables", labels.len())));
    }
    Ok(())
}

/// Deflationary FastICA with the log-cosh contrast. Returns the unmixing
/// matrix (sources = W · x), whether every component converged, and the
/// iterations each took.
pub fn fast_ica(data: &Columns, opts: &IcaOptions) -> Result<(DMatrix<f64>, bool, Vec<usize>)> {
    let x = centered(data)?;
    let p = x.len();
    let n = x[0].len();
    let xm = DMatrix::from_fn(p, n, |r, c| x[r][c]);
    let cov = &xm * xm.transpose() / n as f64;
    let eig = SymmetricEigen::new(cov);
    if eig.eigenvalues.iter().any(|&l| l < 1e-12) {
        return Err(Error::DegenerateMatrix("covariance is singular; columns are collinear".into()));
    }
    let d_inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let k = d_inv_sqrt * eig.eigenvectors.transpose();
    let z = &k * &xm;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut iterations = Vec::with_capacity(p);
    let mut converged = true;
    let project_out = |w: &mut DVector<f64>, rows: &[DVector<f64>]| {
        for r in rows {
            let d = w.dot(r);
            *w -= r * d;
        }
        let norm = w.norm();
        *w /= norm;
    };
    for _ in 0..p {
        let mut w = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
        project_out(&mut w, &rows);
        let mut used = opts.max_iter;
        let mut ok = false;
        for it in 0..opts.max_iter {
            let wz = w.transpose() * &z;
            let g = wz.map(f64::tanh);
            let g_prime_mean = g.iter().map(|t| 1.0 - t * t).sum::<f64>() / n as f64;
            let mut w1 = &z * g.transpose() / n as f64 - &w * g_prime_mean;
            project_out(&mut w1, &rows);
            let lim = (w1.dot(&w).abs() - 1.0).abs();
            w = w1;
            if lim < opts.tol {
                used = it + 1;
                ok = true;
                break;
            }
        }
        converged &= ok;
        iterations.push(used);
        rows.push(w);
    }
    let w_white = DMatrix::from_fn(p, p, |r, c| rows[r][c]);
    Ok((w_white * k, converged, iterations))
}

/// Greedy assignment of unmixing rows to diagonal positions, largest
/// absolute entry first. Returns `perm` with `perm[position] = row`.
fn greedy_diagonal(w: &DMatrix<f64>) -> Vec<usize> {
    let p = w.nrows();
    let mut row_used = vec![false; p];
    let mut col_used = vec![false; p];
    let mut perm = vec![0; p];
    for _ in 0..p {
        let mut best = (0, 0, -1.0);
        for r in (0..p).filter(|&r| !row_used[r]) {
            for c in (0..p).filter(|&c| !col_used[c]) {
                if w[(r, c)].abs() > best.2 {
                    best = (r, c, w[(r, c)].abs());
                }
            }
        }
        row_used[best.0] = true;
        col_used[best.1] = true;
        perm[best.1] = best.0;
    }
    perm
}

fn upper_mass(b: &[Vec<f64>], order: &[usize]) -> f64 {
    let mut s = 0.0;
    for (i, &row) in order.iter().enumerate() {
        for &col in &order[i + 1..] {
            s += b[row][col] * b[row][col];
        }
    }
    s
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).expect("pivot has a successor");
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Causal order that makes `b` as close to strictly lower triangular as
/// possible: minimizes the squared mass of `b[order[i]][order[j]]` for
/// `j > i`. Exhaustive for up to 8 variables, greedy beyond.
pub fn causal_order_from_b(b: &[Vec<f64>]) -> Vec<usize> {
    let p = b.len();
    if p <= 8 {
        let mut perm: Vec<usize> = (0..p).collect();
        let mut best = (perm.clone(), upper_mass(b, &perm));
        while next_permutation(&mut perm) {
            let m = upper_mass(b, &perm);
            if m < best.1 {
                best = (perm.clone(), m);
            }
        }
        return best.0;
    }
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut order = Vec::with_capacity(p);
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let m: f64 = remaining.iter().filter(|&&u| u != v).map(|&u| b[v][u] * b[v][u]).sum();
                (pos, m)
            })
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        order.push(remaining.remove(pos));
    }
    order
}

/// ICA-LiNGAM: FastICA, diagonal-dominant row permutation, row scaling,
/// `B = I − W'`, then the most nearly triangular causal order. Weights
/// that contradict the order are dropped, the rest pruned.
pub fn ica_lingam(data: &Columns, labels: &[String], opts: &IcaOptions) -> Result<IcaLingamResult> {
    check_labels(labels, data.len())?;
    let (w, converged, iterations) = fast_ica(data, opts)?;
    let p = w.nrows();
    let perm = greedy_diagonal(&w);
    let mut b = vec![vec![0.0; p]; p];
    for (i, &r) in perm.iter().enumerate() {
        let d = w[(r, i)];
        for j in 0..p {
            let scaled = w[(r, j)] / d;
            b[i][j] = if i == j { 0.0 } else { -scaled };
        }
    }
    let order = causal_order_from_b(&b);
    let mut rank = vec![0; p];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    for i in 0..p {
        for j in 0..p {
            if rank[j] >= rank[i] || b[i][j].abs() < opts.prune {
                b[i][j] = 0.0;
            }
        }
    }
    let dag = WeightedDag {
        labels: labels.to_vec(),
        order,
        b,
    };
    dag.check()?;
    Ok(IcaLingamResult {
        dag,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn pair(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = x1.iter().map(|v| 0.8 * v + rng.random_range(-0.1..0.1)).collect();
        vec![x1, x2]
    }

    #[test]
    fn entropy_of_gaussian_like_sample_is_near_max() {
        // a symmetric two-point sample is far from Gaussian
        let u: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(entropy(&u) < (1.0 + (2.0 * std::f64::consts::PI).ln()) / 2.0);
    }

    #[test]
    fn direct_recovers_pair() {
        let data = pair(5000, 7);
        let g = direct_lingam(&data, &labels(2), &LingamOptions::default()).unwrap();
        assert_eq!(g.order, vec![0, 1]);
        assert!((g.b[1][0] - 0.8).abs() < 0.05);
        assert_eq!(g.b[0][1], 0.0);
    }

    #[test]
    fn direct_reversed_columns() {
        let mut data = pair(5000, 8);
        data.reverse();
        let g = direct_lingam(&data, &labels(2), &LingamOptions::default()).unwrap();
        assert_eq!(g.order, vec![1, 0]);
    }

    #[test]
    fn constant_column_rejected() {
        let data = vec![vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]];
        assert!(matches!(
            direct_lingam(&data, &labels(2), &LingamOptions::default()),
            Err(Error::ConstantColumn(1))
        ));
        assert!(matches!(
            direct_lingam(&data[..1], &labels(1), &LingamOptions::default()),
            Err(Error::DegenerateMatrix(_))
        ));
    }

    #[test]
    fn ica_recovers_pair() {
        let data = pair(5000, 7);
        let r = ica_lingam(&data, &labels(2), &IcaOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.dag.order, vec![0, 1]);
        assert!((r.dag.b[1][0] - 0.8).abs() < 0.1, "{:?}", r.dag.b);
    }

    #[test]
    fn order_search_on_hand_built_b() {
        // true order 2, 0, 1
        let b = vec![vec![0.0, 0.0, 0.7], vec![0.5, 0.0, -0.3], vec![0.0, 0.0, 0.0]];
        assert_eq!(causal_order_from_b(&b), vec![2, 0, 1]);
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut a = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut a) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
