//! Debunks that re-check a claim already debunked elsewhere, found by
//! cosine similarity between claim embeddings.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engagement::csv_field;
use crate::error::{Error, Result};
use crate::ingest::DebunkRecord;
use crate::topics::EmbeddingSet;

pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const SWEEP_THRESHOLDS: [f64; 4] = [0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub id_a: String,
    pub id_b: String,
    pub cosine: f64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "similarity threshold {threshold} not in (0, 1]"
        )))
    }
}

/// Unit vectors for `ids`, in the given order.
fn unit_vectors(embeddings: &EmbeddingSet, ids: &[&str]) -> Result<Vec<Vec<f64>>> {
    ids.iter()
        .map(|id| {
            let v = embeddings
                .get(id)
                .ok_or_else(|| Error::Precondition(format!("no embedding for `{id}`")))?;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Degenerate(format!("embedding `{id}` has zero norm")));
            }
            Ok(v.iter().map(|x| x / norm).collect())
        })
        .collect()
}

fn cosine_matrix(units: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..units.len())
        .into_par_iter()
        .map(|i| {
            units
                .iter()
                .map(|u| units[i].iter().zip(u).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0))
                .collect()
        })
        .collect()
}

/// Every unordered pair with cosine ≥ threshold, `id_a < id_b`, sorted by ids.
pub fn pairwise_similarity(embeddings: &EmbeddingSet, ids: &[&str], threshold: f64) -> Result<Vec<SimilarPair>> {
    check_threshold(threshold)?;
    let mut sorted: Vec<&str> = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let units = unit_vectors(embeddings, &sorted)?;
    let cos = cosine_matrix(&units);
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if cos[i][j] >= threshold {
                out.push(SimilarPair {
                    id_a: sorted[i].to_string(),
                    id_b: sorted[j].to_string(),
                    cosine: cos[i][j],
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub later_id: String,
    pub earlier_id: String,
    pub similarity: f64,
    pub later_language: String,
    pub earlier_language: String,
    pub later_date: NaiveDate,
    pub earlier_date: NaiveDate,
    pub day_gap: i64,
    pub same_publisher: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupResult {
    pub threshold: f64,
    pub pairs: Vec<DuplicatePair>,
    pub n_debunks: usize,
    pub duplicate_rate: f64,
    pub same_publisher_pairs: usize,
}

/// Pairs each debunk with the earliest earlier debunk at or above the
/// threshold. "Earlier" orders by (date, id), so same-day debunks are
/// ordered by id and no debunk can be both ends of a chain that loops back.
pub fn find_prior_debunks(debunks: &[DebunkRecord], embeddings: &EmbeddingSet, threshold: f64) -> Result<DedupResult> {
    check_threshold(threshold)?;
    let mut order: Vec<&DebunkRecord> = debunks.iter().collect();
    order.sort_by(|a, b| (a.date_published, &a.id).cmp(&(b.date_published, &b.id)));
    if let Some(w) = order.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Precondition(format!("duplicate debunk id `{}`", w[0].id)));
    }
    let ids: Vec<&str> = order.iter().map(|d| d.id.as_str()).collect();
    let cos = cosine_matrix(&unit_vectors(embeddings, &ids)?);
    let mut pairs = Vec::new();
    for (i, later) in order.iter().enumerate() {
        if let Some(j) = (0..i).find(|&j| cos[i][j] >= threshold) {
            let earlier = order[j];
            pairs.push(DuplicatePair {
                later_id: later.id.clone(),
                earlier_id: earlier.id.clone(),
                similarity: cos[i][j],
                later_language: later.language.clone(),
                earlier_language: earlier.language.clone(),
                later_date: later.date_published,
                earlier_date: earlier.date_published,
                day_gap: (later.date_published - earlier.date_published).num_days(),
                same_publisher: later.publisher_domain == earlier.publisher_domain,
            });
        }
    }
    let n = debunks.len();
    Ok(DedupResult {
        threshold,
        same_publisher_pairs: pairs.iter().filter(|p| p.same_publisher).count(),
        duplicate_rate: if n == 0 { 0.0 } else { pairs.len() as f64 / n as f64 },
        n_debunks: n,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub n_pairs: usize,
    pub duplicate_rate: f64,
}

pub fn threshold_sweep(
    debunks: &[DebunkRecord],
    embeddings: &EmbeddingSet,
    thresholds: &[f64],
) -> Result<Vec<SweepRow>> {
    thresholds
        .iter()
        .map(|&t| {
            let r = find_prior_debunks(debunks, embeddings, t)?;
            Ok(SweepRow {
                threshold: t,
                n_pairs: r.pairs.len(),
                duplicate_rate: r.duplicate_rate,
            })
        })
        .collect()
}

impl DedupResult {
    pub fn pairs_csv(&self) -> String {
        let mut s =
            String::from("later_id,earlier_id,similarity,later_language,earlier_language,day_gap,same_publisher\n");
        for p in &self.pairs {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&p.later_id),
                csv_field(&p.earlier_id),
                p.similarity,
                csv_field(&p.later_language),
                csv_field(&p.earlier_language),
                p.day_gap,
                p.same_publisher
            ));
        }
        s
    }

    /// Debunks grouped into narratives: each duplicate chain shares the id of
    /// its earliest debunk. Only narratives debunked more than once appear.
    pub fn narratives(&self) -> Vec<NarrativeEntry> {
        let earlier: BTreeMap<&str, &DuplicatePair> = self.pairs.iter().map(|p| (p.later_id.as_str(), p)).collect();
        fn root<'a>(earlier: &BTreeMap<&str, &'a DuplicatePair>, mut id: &'a str) -> String {
            while let Some(p) = earlier.get(id) {
                id = &p.earlier_id;
            }
            id.to_string()
        }
        let mut out: Vec<NarrativeEntry> = Vec::new();
        let mut roots: BTreeMap<String, (NaiveDate, String)> = BTreeMap::new();
        for p in &self.pairs {
            let r = root(&earlier, &p.later_id);
            out.push(NarrativeEntry {
                narrative_id: r.clone(),
                debunk_id: p.later_id.clone(),
                date: p.later_date,
                language: p.later_language.clone(),
            });
            if r == p.earlier_id {
                roots.insert(r, (p.earlier_date, p.earlier_language.clone()));
            }
        }
        for (id, (date, language)) in roots {
            out.push(NarrativeEntry {
                narrative_id: id.clone(),
                debunk_id: id,
                date,
                language,
            });
        }
        out.sort_by(|a, b| (&a.narrative_id, a.date, &a.debunk_id).cmp(&(&b.narrative_id, b.date, &b.debunk_id)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeEntry {
    pub narrative_id: String,
    pub debunk_id: String,
    pub date: NaiveDate,
    pub language: String,
}

pub fn narratives_csv(entries: &[NarrativeEntry]) -> String {
    let mut s = String::from("narrative_id,debunk_id,date,language\n");
    for e in entries {
        s.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&e.narrative_id),
            csv_field(&e.debunk_id),
            e.date,
            csv_field(&e.language)
        ));
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("threshold,n_pairs,duplicate_rate\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.threshold, r.n_pairs, r.duplicate_rate));
    }
    s
}
