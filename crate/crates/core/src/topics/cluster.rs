//! K-means with k-means++ seeding, silhouette scores and choice of k.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::substream;

/// Mean silhouette below which a chosen k is reported as low-confidence.
pub const LOW_SILHOUETTE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansOptions {
    pub k: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Scale vectors to unit length first, so Euclidean distance orders
    /// pairs the same way cosine distance does.
    pub normalize: bool,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        KmeansOptions {
            k: 6,
            max_iter: 300,
            seed: 0,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    pub assignments: BTreeMap<String, usize>,
    pub centroids: Matrix,
    pub inertia: f64,
    /// Inertia after each assignment step, then the final value.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Clustering {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in self.assignments.values() {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn labels(&self) -> Vec<usize> {
        self.assignments.values().copied().collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Points in id order, optionally unit-normalized.
pub(crate) fn points(embeddings: &EmbeddingSet, normalize: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut ids = Vec::with_capacity(embeddings.len());
    let mut pts = Vec::with_capacity(embeddings.len());
    for (id, v) in embeddings.iter() {
        let mut v = v.to_vec();
        if normalize {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Precondition(format!("embedding `{id}` has zero norm")));
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        ids.push(id.to_string());
        pts.push(v);
    }
    Ok((ids, pts))
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(p, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp(pts: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, "kmeans++");
    let n = pts.len();
    let mut centroids = vec![pts[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = pts.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(pts[idx].clone());
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min(sq_dist(p, centroids.last().unwrap()));
        }
    }
    centroids
}

fn means(pts: &[Vec<f64>], labels: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in pts.iter().zip(labels) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, n) in sums.iter_mut().zip(counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

struct Lloyd {
    labels: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn kmeans_points(pts: &[Vec<f64>], k: usize, max_iter: usize, seed: u64) -> Result<Lloyd> {
    let n = pts.len();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("k = {k} must lie in 1..={n}")));
    }
    if max_iter == 0 {
        return Err(Error::Precondition("max_iter must be ≥ 1".into()));
    }
    let dim = pts[0].len();
    let mut centroids = kmeans_pp(pts, k, seed);
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let nearest_all: Vec<(usize, f64)> = pts.par_iter().map(|p| nearest(p, &centroids)).collect();
        let mut next: Vec<usize> = nearest_all.iter().map(|x| x.0).collect();
        let mut dist: Vec<f64> = nearest_all.iter().map(|x| x.1).collect();
        // Empty clusters take the point farthest from its centroid.
        loop {
            let mut sizes = vec![0usize; k];
            next.iter().for_each(|&c| sizes[c] += 1);
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                break;
            };
            let far = (0..n)
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                .expect("k ≤ n leaves a cluster with two points");
            next[far] = empty;
            centroids[empty] = pts[far].clone();
            dist[far] = 0.0;
        }
        history.push(dist.iter().sum());
        let same = next == labels;
        labels = next;
        if same {
            converged = true;
            break;
        }
        centroids = means(pts, &labels, k, dim);
    }
    centroids = means(pts, &labels, k, dim);
    let inertia: f64 = pts.iter().zip(&labels).map(|(p, &c)| sq_dist(p, &centroids[c])).sum();
    history.push(inertia);
    Ok(Lloyd {
        labels,
        centroids,
        history,
        iterations,
        converged,
    })
}

/// Lloyd iterations from a k-means++ start until the assignment stops
/// changing or `max_iter` is reached.
pub fn kmeans(embeddings: &EmbeddingSet, opts: &KmeansOptions) -> Result<Clustering> {
    let (ids, pts) = points(embeddings, opts.normalize)?;
    let Lloyd {
        labels,
        centroids,
        history,
        iterations,
        converged,
    } = kmeans_points(&pts, opts.k, opts.max_iter, opts.seed)?;
    let dim = embeddings.dimension();
    let mut cm = Matrix::zeros(opts.k, dim);
    for (c, row) in centroids.iter().enumerate() {
        cm.row_mut(c).copy_from_slice(row);
    }
    Ok(Clustering {
        k: opts.k,
        assignments: ids.into_iter().zip(labels).collect(),
        centroids: cm,
        inertia: *history.last().unwrap(),
        inertia_history: history,
        iterations,
        converged,
    })
}

/// Mean silhouette over points; points alone in their cluster score 0.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::Precondition("points and labels differ in length".into()));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&c| sizes[c] += 1);
    let present = sizes.iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::Precondition(
            "silhouette needs at least two non-empty clusters".into(),
        ));
    }
    let scores: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, p) in points.iter().enumerate() {
                if j != i {
                    sums[labels[j]] += sq_dist(&points[i], p).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let d = a.max(b);
            if d > 0.0 {
                (b - a) / d
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub fn clustering_silhouette(embeddings: &EmbeddingSet, clustering: &Clustering, normalize: bool) -> Result<f64> {
    let (_, pts) = points(embeddings, normalize)?;
    silhouette(&pts, &clustering.labels())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub inertia: f64,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub selected: usize,
    pub candidates: Vec<KCandidate>,
    pub warning: Option<String>,
}

/// Picks k with the largest mean silhouette (ties to the smaller k); the
/// inertia curve is returned for elbow inspection only.
pub fn select_k(embeddings: &EmbeddingSet, k_range: RangeInclusive<usize>, opts: &KmeansOptions) -> Result<KSelection> {
    let n = embeddings.len();
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 || hi < lo || hi + 1 > n {
        return Err(Error::Precondition(format!(
            "k range {lo}..={hi} must lie within 2..={} for {n} points",
            n.saturating_sub(1)
        )));
    }
    let (_, pts) = points(embeddings, opts.normalize)?;
    let mut candidates = Vec::new();
    for k in k_range {
        let Lloyd { labels, history, .. } = kmeans_points(&pts, k, opts.max_iter, opts.seed)?;
        candidates.push(KCandidate {
            k,
            inertia: *history.last().unwrap(),
            silhouette: silhouette(&pts, &labels)?,
        });
    }
    let best = candidates
        .iter()
        .fold(&candidates[0], |b, c| if c.silhouette > b.silhouette { c } else { b });
    let warning = (best.silhouette < LOW_SILHOUETTE).then(|| {
        format!(
            "best mean silhouette {:.3} at k = {} is below {LOW_SILHOUETTE}; clusters are weakly separated",
            best.silhouette, best.k
        )
    });
    Ok(KSelection {
        selected: best.k,
        candidates: candidates.clone(),
        warning,
    })
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ra: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
