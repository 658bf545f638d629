//! Claim embedding vectors and a lexical fallback embedder.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::normalize_text;

/// Vectors keyed by id. Iteration is in id order, which keeps every
/// downstream computation independent of input order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

#[derive(Deserialize, Serialize)]
struct Line {
    id: String,
    vector: Vec<f64>,
}

impl EmbeddingSet {
    pub fn new(dimension: usize) -> Self {
        EmbeddingSet {
            dimension,
            vectors: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut set = EmbeddingSet::default();
        for (id, v) in pairs {
            set.insert(id.into(), v)?;
        }
        Ok(set)
    }

    /// Adds a vector; the first insert fixes the dimension.
    pub fn insert(&mut self, id: String, vector: Vec<f64>) -> Result<()> {
        if self.vectors.is_empty() && self.dimension == 0 {
            self.dimension = vector.len();
        }
        if vector.len() != self.dimension || vector.is_empty() {
            return Err(Error::Precondition(format!(
                "embedding `{id}` has dimension {}, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("embedding `{id}` has non-finite entries")));
        }
        if self.vectors.insert(id.clone(), vector).is_some() {
            return Err(Error::Precondition(format!("duplicate embedding id `{id}`")));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Restriction to the given ids; every id must be present.
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<EmbeddingSet> {
        let mut out = EmbeddingSet::new(self.dimension);
        for id in ids {
            let v = self
                .get(id)
                .ok_or_else(|| Error::Precondition(format!("no embedding for `{id}`")))?;
            out.vectors.insert(id.to_string(), v.to_vec());
        }
        Ok(out)
    }

    pub fn parse_jsonl(text: &str, origin: &str) -> Result<Self> {
        let mut set = EmbeddingSet::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: Line =
                serde_json::from_str(line).map_err(|e| Error::format(format!("{origin}:{}", i + 1), e.to_string()))?;
            set.insert(l.id, l.vector)
                .map_err(|e| Error::format(format!("{origin}:{}", i + 1), e.to_string()))?;
        }
        Ok(set)
    }

    pub fn load_jsonl(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_jsonl(&text, &path.display().to_string())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        for (id, v) in &self.vectors {
            serde_json::to_writer(
                &mut out,
                &Line {
                    id: id.clone(),
                    vector: v.clone(),
                },
            )
            .expect("serializable");
            out.write_all(b"\n").expect("in-memory write");
        }
        String::from_utf8(out).expect("json is utf-8")
    }
}

pub const LEXICAL_DIMENSION: usize = 1024;

fn bucket(gram: &str, dim: usize) -> usize {
    let h = Sha256::digest(gram.as_bytes());
    (u64::from_le_bytes(h[..8].try_into().unwrap()) % dim as u64) as usize
}

fn char_ngrams(text: &str) -> Vec<String> {
    let padded: Vec<char> = format!(
        " {} ",
        normalize_text(text).split_whitespace().collect::<Vec<_>>().join(" ")
    )
    .chars()
    .collect();
    let mut grams = Vec::new();
    for n in 3..=5 {
        for w in padded.windows(n) {
            grams.push(w.iter().collect());
        }
    }
    grams
}

/// Character 3–5-gram TF-IDF vectors hashed into `dimension` buckets and
/// scaled to unit length. Monolingual: translations of a claim share few
/// n-grams, so this is unsuitable for cross-language matching.
pub fn lexical_embeddings<'a, I>(docs: I, dimension: usize) -> Result<EmbeddingSet>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    if dimension == 0 {
        return Err(Error::Precondition("embedding dimension must be ≥ 1".into()));
    }
    let counts: Vec<(String, Vec<f64>)> = docs
        .into_iter()
        .map(|(id, text)| {
            let mut tf = vec![0.0; dimension];
            for g in char_ngrams(text) {
                tf[bucket(&g, dimension)] += 1.0;
            }
            (id.to_string(), tf)
        })
        .collect();
    let n = counts.len() as f64;
    let mut df = vec![0.0; dimension];
    for (_, tf) in &counts {
        for (d, v) in df.iter_mut().zip(tf) {
            if *v > 0.0 {
                *d += 1.0;
            }
        }
    }
    let idf: Vec<f64> = df.iter().map(|d| ((1.0 + n) / (1.0 + d)).ln() + 1.0).collect();
    let mut set = EmbeddingSet::new(dimension);
    for (id, tf) in counts {
        let mut v: Vec<f64> = tf.iter().zip(&idf).map(|(t, w)| t * w).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        set.insert(id, v)?;
    }
    Ok(set)
}
