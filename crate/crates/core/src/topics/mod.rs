//! Topic clusters over debunked claims: K-means on claim embeddings,
//! c-TF-IDF descriptions, cluster similarity and per-cluster spread.

mod cluster;
mod ctfidf;
mod embedding;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use cluster::{
    adjusted_rand_index, clustering_silhouette, kmeans, select_k, silhouette, Clustering, KCandidate, KSelection,
    KmeansOptions, LOW_SILHOUETTE,
};
pub use ctfidf::{cluster_similarity, ctfidf, is_stopword, similarity_csv, tokenize, CtfIdf};
pub use embedding::{lexical_embeddings, EmbeddingSet, LEXICAL_DIMENSION};

use crate::engagement::csv_field;
use crate::error::{Error, Result};
use crate::ingest::{DateWindow, MatchedPost, StreamLabel};
use crate::timeseries::DailySeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTimeline {
    /// One daily series per cluster, labeled `cluster_<c>`.
    pub series: Vec<DailySeries>,
    /// Posts counted in more than one cluster.
    pub multi_cluster_posts: usize,
    /// Distinct disinformation posts counted at least once.
    pub posts_counted: usize,
}

/// Daily disinformation posts per cluster. A post counts once for each
/// distinct cluster among the debunks whose links it shares.
pub fn cluster_timeline(
    assignments: &BTreeMap<String, usize>,
    k: usize,
    matched: &[MatchedPost],
    window: &DateWindow,
) -> Result<ClusterTimeline> {
    let mut values = vec![vec![0.0; window.len_days()]; k];
    let mut multi = 0;
    let mut counted = 0;
    for mp in matched.iter().filter(|m| m.stream_label == StreamLabel::Disinformation) {
        let d = mp.post.date();
        if !window.contains(d) {
            continue;
        }
        let mut clusters = BTreeSet::new();
        for id in &mp.debunk_ids {
            let c = *assignments
                .get(id)
                .ok_or_else(|| Error::Precondition(format!("debunk `{id}` has matched posts but no cluster")))?;
            if c >= k {
                return Err(Error::Precondition(format!(
                    "debunk `{id}` assigned to cluster {c} ≥ k = {k}"
                )));
            }
            clusters.insert(c);
        }
        if clusters.is_empty() {
            continue;
        }
        counted += 1;
        if clusters.len() > 1 {
            multi += 1;
        }
        let day = (d - window.start).num_days() as usize;
        for c in clusters {
            values[c][day] += 1.0;
        }
    }
    Ok(ClusterTimeline {
        series: values
            .into_iter()
            .enumerate()
            .map(|(c, v)| DailySeries::new(format!("cluster_{c}"), window.start, v))
            .collect(),
        multi_cluster_posts: multi,
        posts_counted: counted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub cluster: usize,
    /// `<cluster>_<w1>_<w2>_<w3>`.
    pub name: String,
    pub n_claims: usize,
    pub n_posts: f64,
    pub top_words: Vec<String>,
}

pub fn topic_table(
    clustering: &Clustering,
    ctfidf: &CtfIdf,
    timeline: &ClusterTimeline,
    n_words: usize,
) -> Vec<TopicRow> {
    let sizes = clustering.cluster_sizes();
    ctfidf
        .top_words(n_words)
        .into_iter()
        .enumerate()
        .map(|(c, words)| {
            let words: Vec<String> = words.into_iter().map(|w| w.0).collect();
            let mut name = c.to_string();
            for w in words.iter().take(3) {
                name.push('_');
                name.push_str(w);
            }
            TopicRow {
                cluster: c,
                name,
                n_claims: sizes[c],
                n_posts: timeline.series.get(c).map_or(0.0, DailySeries::total),
                top_words: words,
            }
        })
        .collect()
}

pub fn topic_table_csv(rows: &[TopicRow]) -> String {
    let mut s = String::from("cluster,name,n_claims,n_posts,top_words\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.cluster,
            csv_field(&r.name),
            r.n_claims,
            r.n_posts,
            csv_field(&r.top_words.join(" "))
        ));
    }
    s
}

/// Token lists grouped by cluster, in id order within each cluster.
pub fn docs_by_cluster(clustering: &Clustering, texts: &BTreeMap<String, String>) -> Result<Vec<Vec<Vec<String>>>> {
    let mut docs = vec![Vec::new(); clustering.k];
    for (id, &c) in &clustering.assignments {
        let text = texts
            .get(id)
            .ok_or_else(|| Error::Precondition(format!("no claim text for clustered id `{id}`")))?;
        docs[c].push(tokenize(text));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PostRecord;
    use chrono::{TimeZone, Utc};

    fn post(id: &str, day: u32, debunks: &[&str]) -> MatchedPost {
        MatchedPost {
            post: PostRecord {
                id: id.into(),
                created_at: Utc.with_ymd_and_hms(2022, 3, day, 12, 0, 0).unwrap(),
                text: String::new(),
                author_followers: 0,
                author_tweet_count: 0,
                retweet_count: 0,
                reply_count: 0,
                like_count: 0,
                quote_count: 0,
                author_location_raw: None,
                shared_urls: vec![],
                hashtags: vec![],
                is_retweet: false,
                stream_label: Some(StreamLabel::Disinformation),
            },
            stream_label: StreamLabel::Disinformation,
            debunk_ids: debunks.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn window() -> DateWindow {
        DateWindow::new("2022-03-01".parse().unwrap(), "2022-03-05".parse().unwrap()).unwrap()
    }

    #[test]
    fn single_cluster_direct_count() {
        let a: BTreeMap<String, usize> = [("d1".to_string(), 0)].into();
        let posts = vec![post("p1", 2, &["d1"]), post("p2", 2, &["d1"]), post("p3", 2, &["d1"])];
        let t = cluster_timeline(&a, 1, &posts, &window()).unwrap();
        assert_eq!(t.series[0].values, vec![0.0, 3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn interleaved_two_clusters_match_tally() {
        let a: BTreeMap<String, usize> = [("d1".to_string(), 0), ("d2".to_string(), 1), ("d3".to_string(), 1)].into();
        let posts = vec![
            post("p1", 1, &["d1"]),
            post("p2", 2, &["d2"]),
            post("p3", 2, &["d1", "d2"]),
            post("p4", 3, &["d2", "d3"]),
            post("p5", 5, &["d3"]),
        ];
        let t = cluster_timeline(&a, 2, &posts, &window()).unwrap();
        assert_eq!(t.series[0].values, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.series[1].values, vec![0.0, 2.0, 1.0, 0.0, 1.0]);
        assert_eq!(t.multi_cluster_posts, 1);
        assert_eq!(t.posts_counted, 5);
        let total: f64 = t.series.iter().map(DailySeries::total).sum();
        assert_eq!(total, (t.posts_counted + t.multi_cluster_posts) as f64);
    }

    #[test]
    fn unassigned_debunk_is_error() {
        let a = BTreeMap::new();
        assert!(cluster_timeline(&a, 1, &[post("p", 1, &["dx"])], &window()).is_err());
    }
}
