//! Class-based TF-IDF over per-cluster concatenated documents.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

static STOPWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();

fn stopwords() -> &'static HashSet<&'static str> {
    STOPWORDS.get_or_init(|| {
        include_str!("../../data/stopwords_en.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Lowercases, splits on anything that is not a letter and drops single
/// letters and English stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| w.chars().nth(1).is_some() && !is_stopword(w))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtfIdf {
    /// Sorted vocabulary; column order of `scores`.
    pub vocabulary: Vec<String>,
    /// k × V.
    pub scores: Matrix,
    /// Average token count per cluster.
    pub avg_tokens: f64,
}

impl CtfIdf {
    pub fn k(&self) -> usize {
        self.scores.rows()
    }

    /// Highest-scoring terms per cluster; ties broken alphabetically, zero scores dropped.
    pub fn top_words(&self, n: usize) -> Vec<Vec<(String, f64)>> {
        (0..self.k())
            .map(|c| {
                let mut row: Vec<(usize, f64)> = self
                    .scores
                    .row(c)
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, s)| *s > 0.0)
                    .collect();
                row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                row.into_iter()
                    .take(n)
                    .map(|(j, s)| (self.vocabulary[j].clone(), s))
                    .collect()
            })
            .collect()
    }
}

/// `score(t, c) = tf(t, c) · ln(1 + A / f(t))` with `tf` the count of t in
/// cluster c, `f` its count over all clusters and `A` the mean tokens per cluster.
pub fn ctfidf(docs_by_cluster: &[Vec<Vec<String>>]) -> Result<CtfIdf> {
    if docs_by_cluster.is_empty() {
        return Err(Error::Precondition("c-TF-IDF needs at least one cluster".into()));
    }
    if let Some(c) = docs_by_cluster.iter().position(Vec::is_empty) {
        return Err(Error::Precondition(format!("cluster {c} has no documents")));
    }
    let mut tf: Vec<BTreeMap<&str, f64>> = vec![BTreeMap::new(); docs_by_cluster.len()];
    let mut total: BTreeMap<&str, f64> = BTreeMap::new();
    let mut n_tokens = 0usize;
    for (c, docs) in docs_by_cluster.iter().enumerate() {
        for tok in docs.iter().flatten() {
            *tf[c].entry(tok).or_default() += 1.0;
            *total.entry(tok).or_default() += 1.0;
            n_tokens += 1;
        }
    }
    if total.is_empty() {
        return Err(Error::Degenerate("empty vocabulary".into()));
    }
    let k = docs_by_cluster.len();
    let avg = n_tokens as f64 / k as f64;
    let vocabulary: Vec<String> = total.keys().map(|s| s.to_string()).collect();
    let index: BTreeMap<&str, usize> = total.keys().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut scores = Matrix::zeros(k, vocabulary.len());
    for (c, counts) in tf.iter().enumerate() {
        for (t, n) in counts {
            scores[(c, index[t])] = n * (1.0 + avg / total[t]).ln();
        }
    }
    Ok(CtfIdf {
        vocabulary,
        scores,
        avg_tokens: avg,
    })
}

/// Cosine similarity between cluster score rows.
pub fn cluster_similarity(scores: &Matrix) -> Result<Matrix> {
    let k = scores.rows();
    let norms: Vec<f64> = (0..k)
        .map(|c| scores.row(c).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    if let Some(c) = norms.iter().position(|n| !(*n > 0.0)) {
        return Err(Error::Degenerate(format!("cluster {c} has an all-zero score vector")));
    }
    let mut sim = Matrix::identity(k);
    for a in 0..k {
        for b in a + 1..k {
            let dot: f64 = scores.row(a).iter().zip(scores.row(b)).map(|(x, y)| x * y).sum();
            let v = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            sim[(a, b)] = v;
            sim[(b, a)] = v;
        }
    }
    Ok(sim)
}

pub fn similarity_csv(sim: &Matrix) -> String {
    let k = sim.rows();
    let mut s = String::from("cluster");
    for c in 0..k {
        s.push_str(&format!(",{c}"));
    }
    s.push('\n');
    for r in 0..k {
        s.push_str(&r.to_string());
        for c in 0..k {
            s.push_str(&format!(",{}", sim[(r, c)]));
        }
        s.push('\n');
    }
    s
}
