//! Mini-batch k-means with k-means++ seeding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
}

impl ClusterModel {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == cluster)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early stop once the largest centroid move over an epoch is below this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            batch_size: 256,
            max_epochs: 100,
            tol: 1e-4,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lower index.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

fn kmeans_plus_plus(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![data[first].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &data[first])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a centroid; take an unused index
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push(data[pick].clone());
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &data[pick]));
        }
    }
    centroids
}

pub fn minibatch_kmeans(data: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterModel> {
    minibatch_kmeans_with(data, k, seed, &KMeansOptions::default())
}

/// Clusters `data` into at most `k` groups, deterministically in `seed`.
///
/// Uses per-centroid learning rates (1 / points absorbed). Clusters that end
/// up empty are dropped, and the surviving ones are relabelled in order of
/// their first member, so label 0 always contains point 0.
pub fn minibatch_kmeans_with(
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<ClusterModel> {
    let m = data.len();
    if k == 0 || k > m {
        return Err(Error::BadK { k, m });
    }
    let dim = data[0].len();
    if let Some(bad) = data.iter().find(|x| x.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(data, k, &mut rng);
    let mut counts = vec![0usize; k];
    let batch = opts.batch_size.clamp(1, m);
    let mut order: Vec<usize> = (0..m).collect();

    for _ in 0..opts.max_epochs {
        let before = centroids.clone();
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let assign: Vec<usize> = chunk.iter().map(|&i| nearest(&data[i], &centroids)).collect();
            for (&i, &c) in chunk.iter().zip(&assign) {
                counts[c] += 1;
                let eta = 1.0 / counts[c] as f64;
                for (mu, x) in centroids[c].iter_mut().zip(&data[i]) {
                    *mu += eta * (x - *mu);
                }
            }
        }
        let shift = centroids
            .iter()
            .zip(&before)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        if shift < opts.tol {
            break;
        }
    }

    let raw: Vec<usize> = data.iter().map(|x| nearest(x, &centroids)).collect();
    let mut remap = vec![usize::MAX; k];
    let mut kept = Vec::new();
    for &c in &raw {
        if remap[c] == usize::MAX {
            remap[c] = kept.len();
            kept.push(c);
        }
    }
    Ok(ClusterModel {
        k: kept.len(),
        labels: raw.iter().map(|&c| remap[c]).collect(),
        centroids: kept.iter().map(|&c| centroids[c].clone()).collect(),
        seed,
    })
}
