//! Stage-by-stage pipeline over an output directory. Each stage reads only
//! its inputs and earlier stages' artifacts, so any stage can be rerun alone.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{hex, PipelineConfig, SeriesInput};
use super::svg;
use crate::causality::{fevd, fit_var, granger_all_pairs, granger_to_csv, irf, select_lag, FevdResult, IrfResult};
use crate::dedup::{find_prior_debunks, narratives_csv, sweep_csv, threshold_sweep};
use crate::engagement::{
    country_crosstab, crosstab_pairs, csv_field, histogram, lag_days, metric_summary, top_hashtags, Histogram,
};
use crate::error::{Error, Result};
use crate::ingest::{
    filter_records, load_debunks, load_keywords, load_posts, match_posts_to_links, resolve_country, write_rejects_csv,
    DebunkFormat, DebunkRecord, Gazetteer, MatchedPost, Reject, StreamLabel,
};
use crate::rng::RNG_STREAM_VERSION;
use crate::timeseries::{
    adf_test, daily_counts, rolling_mean, series_from_csv, series_to_csv, DailySeries, SeriesMatrix,
    MACKINNON_TABLE_VERSION,
};
use crate::topics::{
    cluster_similarity, cluster_timeline, ctfidf, docs_by_cluster, kmeans, lexical_embeddings, select_k,
    similarity_csv, topic_table, topic_table_csv, EmbeddingSet, KmeansOptions, LEXICAL_DIMENSION,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Engagement,
    Causality,
    Topics,
    Dedup,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Engagement,
        Stage::Causality,
        Stage::Topics,
        Stage::Dedup,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Engagement => "engagement",
            Stage::Causality => "causality",
            Stage::Topics => "topics",
            Stage::Dedup => "dedup",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub ok: bool,
    pub error: Option<String>,
    /// Input path (config key or artifact path) → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Artifact path relative to the output directory → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub rng_stream: String,
    pub mackinnon_tables: String,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    fn new(cfg: &PipelineConfig) -> Self {
        RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            rng_stream: RNG_STREAM_VERSION.to_string(),
            mackinnon_tables: MACKINNON_TABLE_VERSION.to_string(),
            stages: Vec::new(),
        }
    }

    /// Manifest in `out`, reused when it was produced by the same config.
    fn open(cfg: &PipelineConfig, out: &Path) -> Self {
        let fresh = Self::new(cfg);
        std::fs::read_to_string(out.join(MANIFEST_FILE))
            .ok()
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok())
            .filter(|m| m.config_hash == fresh.config_hash && m.toolkit_version == fresh.toolkit_version)
            .unwrap_or(fresh)
    }

    fn record(&mut self, rec: StageRecord) {
        self.stages.retain(|s| s.stage != rec.stage);
        self.stages.push(rec);
        self.stages.sort_by_key(|s| s.stage);
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    fn write(&self, out: &Path) -> Result<()> {
        write_atomic(&out.join(MANIFEST_FILE), json_bytes(self).as_slice())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("artifact serializes");
    b.push(b'\n');
    b
}

/// Write to a sibling temp file, then rename over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct StageIo<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl<'a> StageIo<'a> {
    fn new(cfg: &'a PipelineConfig) -> Self {
        StageIo {
            cfg,
            out: cfg.output_path(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// Records the digest of a config-referenced input file.
    fn input(&mut self, key: &str, path: &Path) -> Result<PathBuf> {
        let full = self.cfg.resolve(path);
        let bytes = std::fs::read(&full).map_err(|e| Error::io(&full, e))?;
        self.inputs.insert(key.to_string(), sha256_hex(&bytes));
        Ok(full)
    }

    fn artifact(&mut self, rel: &str, producer: Stage) -> Result<String> {
        let path = self.out.join(rel);
        let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact {
                path: path.clone(),
                stage: producer.as_str(),
            },
            _ => Error::io(&path, e),
        })?;
        self.inputs.insert(rel.to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn json_artifact<T: for<'de> Deserialize<'de>>(&mut self, rel: &str, producer: Stage) -> Result<T> {
        let text = self.artifact(rel, producer)?;
        serde_json::from_str(&text).map_err(|e| Error::format(rel, e))
    }

    fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let bytes = bytes.as_ref();
        write_atomic(&self.out.join(rel), bytes)?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, v: &T) -> Result<()> {
        self.write(rel, json_bytes(v))
    }
}

pub mod artifacts {
    pub const DEBUNKS: &str = "ingest/debunks.json";
    pub const MATCHED_POSTS: &str = "ingest/matched_posts.json";
    pub const REJECTS: &str = "ingest/rejects.csv";
    pub const DAILY_COUNTS: &str = "ingest/daily_counts.csv";
    pub const INGEST_SUMMARY: &str = "ingest/summary.json";
    pub const METRICS: &str = "engagement/metrics.csv";
    pub const LAG_DAYS: &str = "engagement/lag_days.csv";
    pub const LAG_HISTOGRAM: &str = "engagement/lag_histogram.csv";
    pub const HASHTAGS: &str = "engagement/hashtags.csv";
    pub const CROSSTAB: &str = "engagement/country_crosstab.csv";
    pub const ENGAGEMENT_SUMMARY: &str = "engagement/summary.json";
    pub const VAR_SERIES: &str = "causality/series.csv";
    pub const ADF: &str = "causality/adf.json";
    pub const VAR_MODEL: &str = "causality/var_model.json";
    pub const GRANGER: &str = "causality/granger.csv";
    pub const IRF_CSV: &str = "causality/irf.csv";
    pub const IRF_JSON: &str = "causality/irf.json";
    pub const FEVD_CSV: &str = "causality/fevd.csv";
    pub const FEVD_JSON: &str = "causality/fevd.json";
    pub const ASSIGNMENTS: &str = "topics/assignments.csv";
    pub const TOPICS: &str = "topics/topics.csv";
    pub const SIMILARITY: &str = "topics/similarity.csv";
    pub const TIMELINE: &str = "topics/timeline.csv";
    pub const TOPICS_SUMMARY: &str = "topics/summary.json";
    pub const DEDUP_PAIRS: &str = "dedup/pairs.csv";
    pub const NARRATIVES: &str = "dedup/narratives.csv";
    pub const SWEEP: &str = "dedup/threshold_sweep.csv";
    pub const DEDUP_SUMMARY: &str = "dedup/summary.json";
    pub const FIG_SPREAD: &str = "figures/daily_spread.svg";
    pub const FIG_LAG: &str = "figures/lag_histogram.svg";
    pub const FIG_IRF: &str = "figures/irf_grid.svg";
    pub const FIG_FEVD: &str = "figures/fevd.svg";
    pub const FIG_TIMELINE: &str = "figures/cluster_timeline.svg";
    pub const FIG_HEATMAP: &str = "figures/cluster_similarity.svg";
}
use artifacts as a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IngestSummary {
    debunks_loaded: usize,
    debunks_kept: usize,
    debunks_rejected: usize,
    linkless_debunks: Vec<String>,
    posts_loaded: usize,
    posts_rejected: usize,
    matched_in_window: usize,
    matched_outside_window: usize,
    diagnostics: crate::ingest::MatchDiagnostics,
    filter_warnings: Vec<String>,
}

fn run_ingest(io: &mut StageIo) -> Result<()> {
    let cfg = io.cfg;
    let window = cfg.window()?;
    let mut records = Vec::new();
    let mut rejects: Vec<Reject> = Vec::new();
    let mut linkless = Vec::new();
    for (key, path, format) in [
        (
            "inputs.claimreview",
            &cfg.inputs.claimreview,
            DebunkFormat::ClaimreviewJson,
        ),
        (
            "inputs.euvsdisinfo",
            &cfg.inputs.euvsdisinfo,
            DebunkFormat::EuvsdisinfoTable,
        ),
    ] {
        if let Some(p) = path {
            let full = io.input(key, p)?;
            let loaded = load_debunks(&full, format)?;
            records.extend(loaded.records);
            rejects.extend(loaded.rejects);
            linkless.extend(loaded.linkless);
        }
    }
    let mut seen = HashSet::new();
    let mut unique = Vec::with_capacity(records.len());
    for r in records {
        if seen.insert(r.id.clone()) {
            unique.push(r);
        } else {
            rejects.push(Reject::new(&r.id, "duplicate_id"));
        }
    }
    let loaded = unique.len();
    let keywords = load_keywords(&io.input("inputs.keywords", &cfg.inputs.keywords)?)?;
    let filtered = filter_records(unique, &keywords, &window)?;
    rejects.extend(filtered.rejects);
    let mut kept = filtered.kept;
    kept.sort_by(|x, y| x.id.cmp(&y.id));
    let (posts, post_rejects) = load_posts(&io.input("inputs.posts", &cfg.inputs.posts)?)?;
    let matched = match_posts_to_links(&posts, &kept);
    let (in_window, outside): (Vec<MatchedPost>, Vec<MatchedPost>) = matched
        .matched
        .into_iter()
        .partition(|m| window.contains(m.post.date()));
    let disinfo = daily_counts(
        "disinformation",
        in_window
            .iter()
            .filter(|m| m.stream_label == StreamLabel::Disinformation)
            .map(|m| &m.post),
        &window,
        true,
    );
    let debunk = daily_counts(
        "debunk",
        in_window
            .iter()
            .filter(|m| m.stream_label == StreamLabel::Debunk)
            .map(|m| &m.post),
        &window,
        true,
    );
    let summary = IngestSummary {
        debunks_loaded: loaded,
        debunks_kept: kept.len(),
        debunks_rejected: rejects.len(),
        linkless_debunks: linkless,
        posts_loaded: posts.len(),
        posts_rejected: post_rejects.len(),
        matched_in_window: in_window.len(),
        matched_outside_window: outside.len(),
        diagnostics: matched.diagnostics,
        filter_warnings: filtered.warnings,
    };
    rejects.extend(post_rejects);
    io.write_json(a::DEBUNKS, &kept)?;
    io.write_json(a::MATCHED_POSTS, &in_window)?;
    io.write(a::REJECTS, write_rejects_csv(&rejects)?)?;
    io.write(a::DAILY_COUNTS, series_to_csv(&[disinfo, debunk]))?;
    io.write_json(a::INGEST_SUMMARY, &summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EngagementStageSummary {
    disinformation_posts: usize,
    debunk_posts: usize,
    lag_skewness_g1: Option<f64>,
    debunks_with_lags: usize,
    author_country_coverage_pct: f64,
    crosstab_pairs: usize,
}

fn split_streams(matched: &[MatchedPost]) -> (Vec<&MatchedPost>, Vec<&MatchedPost>) {
    matched
        .iter()
        .partition(|m| m.stream_label == StreamLabel::Disinformation)
}

fn run_engagement(io: &mut StageIo) -> Result<()> {
    let cfg = io.cfg;
    let debunks: Vec<DebunkRecord> = io.json_artifact(a::DEBUNKS, Stage::Ingest)?;
    let matched: Vec<MatchedPost> = io.json_artifact(a::MATCHED_POSTS, Stage::Ingest)?;
    let gazetteer = match &cfg.inputs.gazetteer {
        Some(p) => Gazetteer::load(&io.input("inputs.gazetteer", p)?)?,
        None => Gazetteer::bundled(),
    };
    let (dis, deb) = split_streams(&matched);
    let dis_posts: Vec<_> = dis.iter().map(|m| &m.post).collect();
    let deb_posts: Vec<_> = deb.iter().map(|m| &m.post).collect();
    let summary = metric_summary(
        &dis_posts,
        &deb_posts,
        ("disinformation", "debunk"),
        cfg.engagement.alpha,
    )?;
    io.write(a::METRICS, summary.to_csv())?;

    let lags = lag_days(&debunks, &dis);
    let mut lag_csv = String::from("debunk_id,mean_lag_days\n");
    for (id, v) in &lags.per_debunk_mean_lags {
        lag_csv.push_str(&format!("{},{v}\n", csv_field(id)));
    }
    io.write(a::LAG_DAYS, lag_csv)?;
    io.write(
        a::LAG_HISTOGRAM,
        histogram(&lags.values(), cfg.engagement.lag_bin_days)?.to_csv(),
    )?;

    let mut tags = String::from("stream,rank,hashtag,count\n");
    for (label, posts) in [("disinformation", &dis_posts), ("debunk", &deb_posts)] {
        for (rank, (tag, n)) in top_hashtags(posts.iter().copied(), cfg.engagement.top_hashtags)
            .iter()
            .enumerate()
        {
            tags.push_str(&format!("{label},{},{},{n}\n", rank + 1, csv_field(tag)));
        }
    }
    io.write(a::HASHTAGS, tags)?;

    let with_country: Vec<(&MatchedPost, Option<String>)> = dis
        .iter()
        .map(|m| {
            (
                *m,
                m.post
                    .author_location_raw
                    .as_deref()
                    .and_then(|l| resolve_country(l, &gazetteer)),
            )
        })
        .collect();
    let located = with_country.iter().filter(|(_, c)| c.is_some()).count();
    let pairs = crosstab_pairs(&debunks, &with_country);
    io.write(
        a::CROSSTAB,
        country_crosstab(&pairs, cfg.engagement.crosstab_top).to_csv(),
    )?;
    io.write_json(
        a::ENGAGEMENT_SUMMARY,
        &EngagementStageSummary {
            disinformation_posts: dis.len(),
            debunk_posts: deb.len(),
            lag_skewness_g1: lags.skewness_g1,
            debunks_with_lags: lags.per_debunk_mean_lags.len(),
            author_country_coverage_pct: if dis.is_empty() {
                0.0
            } else {
                100.0 * located as f64 / dis.len() as f64
            },
            crosstab_pairs: pairs.len(),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdfEntry {
    label: String,
    report: Option<crate::timeseries::AdfReport>,
    error: Option<String>,
}

fn run_causality(io: &mut StageIo) -> Result<()> {
    let cfg = io.cfg;
    let c = &cfg.causality;
    let window = cfg.window()?;
    let matched: Vec<MatchedPost> = io.json_artifact(a::MATCHED_POSTS, Stage::Ingest)?;
    let series: Vec<DailySeries> = ["disinformation", "debunk"]
        .iter()
        .map(|label| {
            let raw = daily_counts(
                label,
                matched
                    .iter()
                    .filter(|m| m.stream_label.as_str() == *label)
                    .map(|m| &m.post),
                &window,
                c.include_retweets,
            );
            match c.input {
                SeriesInput::Raw => Ok(raw),
                SeriesInput::Rolling7 => rolling_mean(&raw, 7),
                SeriesInput::Log1p => Ok(raw.map(f64::ln_1p)),
            }
        })
        .collect::<Result<_>>()?;
    io.write(a::VAR_SERIES, series_to_csv(&series))?;
    let adf: Vec<AdfEntry> = series
        .iter()
        .map(|s| match adf_test(s, c.adf_max_lag) {
            Ok(r) => AdfEntry {
                label: s.label.clone(),
                report: Some(r),
                error: None,
            },
            Err(e) => AdfEntry {
                label: s.label.clone(),
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    io.write_json(a::ADF, &adf)?;

    let data = SeriesMatrix::from_series(&series)?;
    let order: Vec<usize> = c
        .ordering
        .iter()
        .map(|l| data.index_of(l).expect("validated ordering"))
        .collect();
    let data = data.select(&order);
    let (lag, selection) = match c.lag {
        Some(k) => (k, None),
        None => {
            let sel = select_lag(&data, c.max_lag)?;
            (sel.selected, Some(sel))
        }
    };
    let model = fit_var(&data, lag)?;
    #[derive(Serialize)]
    struct ModelArtifact<'m> {
        lag_selection: Option<crate::causality::LagSelection>,
        spectral_radius: f64,
        model: &'m crate::causality::VarModel,
    }
    io.write_json(
        a::VAR_MODEL,
        &ModelArtifact {
            lag_selection: selection,
            spectral_radius: model.spectral_radius(),
            model: &model,
        },
    )?;
    io.write(a::GRANGER, granger_to_csv(&granger_all_pairs(&data, lag)?))?;
    let responses = irf(&model, c.horizon, c.bootstrap_draws, cfg.seed)?;
    io.write(a::IRF_CSV, responses.to_csv())?;
    io.write_json(a::IRF_JSON, &responses)?;
    let decomposition = fevd(&model, c.horizon)?;
    io.write(a::FEVD_CSV, decomposition.to_csv())?;
    io.write_json(a::FEVD_JSON, &decomposition)
}

/// Claim embeddings from the configured file, or the lexical fallback.
fn claim_embeddings(io: &mut StageIo, debunks: &[DebunkRecord]) -> Result<EmbeddingSet> {
    match &io.cfg.inputs.embeddings {
        Some(p) => {
            let full = io.input("inputs.embeddings", p)?;
            EmbeddingSet::load_jsonl(&full)?.subset(debunks.iter().map(|d| d.id.as_str()))
        }
        None => lexical_embeddings(
            debunks.iter().map(|d| (d.id.as_str(), d.filter_text())),
            LEXICAL_DIMENSION,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopicsStageSummary {
    k: usize,
    k_selection: Option<crate::topics::KSelection>,
    inertia: f64,
    iterations: usize,
    converged: bool,
    silhouette: Option<f64>,
    posts_counted: usize,
    multi_cluster_posts: usize,
    embeddings: String,
}

fn run_topics(io: &mut StageIo) -> Result<()> {
    let cfg = io.cfg;
    let t = &cfg.topics;
    let debunks: Vec<DebunkRecord> = io.json_artifact(a::DEBUNKS, Stage::Ingest)?;
    let matched: Vec<MatchedPost> = io.json_artifact(a::MATCHED_POSTS, Stage::Ingest)?;
    let embeddings = claim_embeddings(io, &debunks)?;
    let mut opts = KmeansOptions {
        k: t.k,
        max_iter: t.max_iter,
        seed: cfg.seed,
        normalize: t.normalize,
    };
    let selection = match t.k_range {
        Some([lo, hi]) => {
            let sel = select_k(&embeddings, lo..=hi, &opts)?;
            opts.k = sel.selected;
            Some(sel)
        }
        None => None,
    };
    let clustering = kmeans(&embeddings, &opts)?;
    let silhouette = crate::topics::clustering_silhouette(&embeddings, &clustering, t.normalize).ok();
    let source: BTreeMap<&str, &DebunkRecord> = debunks.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut assign = String::from("id,cluster,source,language\n");
    for (id, cl) in &clustering.assignments {
        let d = source[id.as_str()];
        let src = serde_json::to_value(d.source)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        assign.push_str(&format!("{},{cl},{src},{}\n", csv_field(id), csv_field(&d.language)));
    }
    io.write(a::ASSIGNMENTS, assign)?;
    let texts: BTreeMap<String, String> = debunks
        .iter()
        .map(|d| (d.id.clone(), d.filter_text().to_string()))
        .collect();
    let scores = ctfidf(&docs_by_cluster(&clustering, &texts)?)?;
    let timeline = cluster_timeline(&clustering.assignments, clustering.k, &matched, &cfg.window()?)?;
    io.write(
        a::TOPICS,
        topic_table_csv(&topic_table(&clustering, &scores, &timeline, t.top_words)),
    )?;
    io.write(a::SIMILARITY, similarity_csv(&cluster_similarity(&scores.scores)?))?;
    io.write(a::TIMELINE, series_to_csv(&timeline.series))?;
    io.write_json(
        a::TOPICS_SUMMARY,
        &TopicsStageSummary {
            k: clustering.k,
            k_selection: selection,
            inertia: clustering.inertia,
            iterations: clustering.iterations,
            converged: clustering.converged,
            silhouette,
            posts_counted: timeline.posts_counted,
            multi_cluster_posts: timeline.multi_cluster_posts,
            embeddings: if cfg.inputs.embeddings.is_some() {
                "input".into()
            } else {
                "lexical_fallback".into()
            },
        },
    )
}

fn run_dedup(io: &mut StageIo) -> Result<()> {
    let cfg = io.cfg;
    let debunks: Vec<DebunkRecord> = io.json_artifact(a::DEBUNKS, Stage::Ingest)?;
    let embeddings = claim_embeddings(io, &debunks)?;
    let result = find_prior_debunks(&debunks, &embeddings, cfg.dedup.threshold)?;
    io.write(a::DEDUP_PAIRS, result.pairs_csv())?;
    io.write(a::NARRATIVES, narratives_csv(&result.narratives()))?;
    io.write(
        a::SWEEP,
        sweep_csv(&threshold_sweep(&debunks, &embeddings, &cfg.dedup.sweep)?),
    )?;
    #[derive(Serialize)]
    struct Summary {
        threshold: f64,
        n_debunks: usize,
        n_pairs: usize,
        duplicate_rate: f64,
        same_publisher_pairs: usize,
    }
    io.write_json(
        a::DEDUP_SUMMARY,
        &Summary {
            threshold: result.threshold,
            n_debunks: result.n_debunks,
            n_pairs: result.pairs.len(),
            duplicate_rate: result.duplicate_rate,
            same_publisher_pairs: result.same_publisher_pairs,
        },
    )
}

fn labeled_series(series: &[DailySeries]) -> (Vec<String>, Vec<(String, Vec<f64>)>) {
    let dates = series
        .first()
        .map(|s| (0..s.len()).map(|i| s.date_at(i).format("%b %d").to_string()).collect())
        .unwrap_or_default();
    (
        dates,
        series.iter().map(|s| (s.label.clone(), s.values.clone())).collect(),
    )
}

fn run_report(io: &mut StageIo) -> Result<()> {
    let counts = series_from_csv(&io.artifact(a::DAILY_COUNTS, Stage::Ingest)?)?;
    let smoothed: Vec<DailySeries> = counts.iter().map(|s| rolling_mean(s, 7)).collect::<Result<_>>()?;
    let (dates, data) = labeled_series(&smoothed);
    io.write(
        a::FIG_SPREAD,
        svg::stacked_area("Rolling 7-day average of daily posts", &dates, &data),
    )?;

    let hist = Histogram::from_csv(&io.artifact(a::LAG_HISTOGRAM, Stage::Engagement)?)?;
    let lag_text = io.artifact(a::LAG_DAYS, Stage::Engagement)?;
    let lags: Vec<f64> = lag_text
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next().and_then(|v| v.parse().ok()))
        .collect();
    io.write(
        a::FIG_LAG,
        svg::histogram_density(
            "Mean lag between disinformation posts and debunk",
            "lag (days)",
            &hist,
            &lags,
        ),
    )?;

    let responses: IrfResult = io.json_artifact(a::IRF_JSON, Stage::Causality)?;
    io.write(
        a::FIG_IRF,
        svg::irf_grid("Orthogonalized impulse responses", &responses),
    )?;
    let decomposition: FevdResult = io.json_artifact(a::FEVD_JSON, Stage::Causality)?;
    io.write(
        a::FIG_FEVD,
        svg::fevd_stacked("Forecast error variance decomposition", &decomposition),
    )?;

    let timeline = series_from_csv(&io.artifact(a::TIMELINE, Stage::Topics)?)?;
    let (dates, data) = labeled_series(&timeline);
    io.write(
        a::FIG_TIMELINE,
        svg::line_chart("Disinformation posts per topic cluster", &dates, &data),
    )?;

    let sim_text = io.artifact(a::SIMILARITY, Stage::Topics)?;
    let rows: Vec<Vec<f64>> = sim_text
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|e| Error::format(a::SIMILARITY, e)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let labels: Vec<String> = (0..rows.len()).map(|c| format!("cluster {c}")).collect();
    io.write(
        a::FIG_HEATMAP,
        svg::heatmap(
            "Topic cluster similarity",
            &labels,
            &crate::linalg::Matrix::from_rows(&rows),
        ),
    )
}

fn execute(cfg: &PipelineConfig, stage: Stage) -> StageRecord {
    let started = Instant::now();
    let mut io = StageIo::new(cfg);
    let result = match stage {
        Stage::Ingest => run_ingest(&mut io),
        Stage::Engagement => run_engagement(&mut io),
        Stage::Causality => run_causality(&mut io),
        Stage::Topics => run_topics(&mut io),
        Stage::Dedup => run_dedup(&mut io),
        Stage::Report => run_report(&mut io),
    };
    StageRecord {
        stage,
        ok: result.is_ok(),
        error: result.err().map(|e| e.to_string()),
        inputs: io.inputs,
        outputs: io.outputs,
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// Error carrying the manifest as written when a stage failed.
#[derive(Debug)]
pub struct PipelineFailure {
    pub stage: Stage,
    pub message: String,
    pub manifest: Box<RunManifest>,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineFailure {}

/// Runs the given stages in order; independent analysis stages run in
/// parallel. Stops at the first failing group, leaving a partial manifest.
pub fn run_stages(cfg: &PipelineConfig, stages: &[Stage]) -> std::result::Result<RunManifest, PipelineFailure> {
    let out = cfg.output_path();
    let mut manifest = RunManifest::open(cfg, &out);
    let fail = |manifest: RunManifest, rec: &StageRecord| PipelineFailure {
        stage: rec.stage,
        message: rec.error.clone().unwrap_or_default(),
        manifest: Box::new(manifest),
    };
    let mut groups: Vec<Vec<Stage>> = Vec::new();
    for &s in stages {
        let parallel = matches!(s, Stage::Causality | Stage::Topics | Stage::Dedup);
        match groups.last_mut() {
            Some(g)
                if parallel
                    && g.iter()
                        .all(|x| matches!(x, Stage::Causality | Stage::Topics | Stage::Dedup)) =>
            {
                g.push(s)
            }
            _ => groups.push(vec![s]),
        }
    }
    for group in groups {
        let records: Vec<StageRecord> = if group.len() == 1 {
            vec![execute(cfg, group[0])]
        } else {
            use rayon::prelude::*;
            group.par_iter().map(|&s| execute(cfg, s)).collect()
        };
        let failed = records.iter().find(|r| !r.ok).cloned();
        for r in records {
            manifest.record(r);
        }
        if let Err(e) = manifest.write(&out) {
            let rec = StageRecord {
                stage: group[0],
                ok: false,
                error: Some(e.to_string()),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                seconds: 0.0,
            };
            return Err(fail(manifest, &rec));
        }
        if let Some(rec) = failed {
            return Err(fail(manifest, &rec));
        }
    }
    Ok(manifest)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<RunManifest, PipelineFailure> {
    run_stages(cfg, &Stage::ALL)
}
