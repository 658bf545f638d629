//! Pipeline configuration read from a TOML file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::DateWindow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub inputs: Inputs,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub engagement: EngagementConfig,
    #[serde(default)]
    pub causality: CausalityConfig,
    #[serde(default)]
    pub topics: TopicsConfig,
    #[serde(default)]
    pub dedup: DedupConfig,
    /// Directory relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub claimreview: Option<PathBuf>,
    pub euvsdisinfo: Option<PathBuf>,
    pub posts: PathBuf,
    pub keywords: PathBuf,
    /// JSONL `{id, vector}` claim embeddings; lexical fallback when absent.
    pub embeddings: Option<PathBuf>,
    /// TSV place → country table; the bundled one when absent.
    pub gazetteer: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(deserialize_with = "date")]
    pub start: NaiveDate,
    #[serde(deserialize_with = "date")]
    pub end: NaiveDate,
}

/// Accepts a bare TOML date as well as a quoted one.
fn date<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<NaiveDate, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Toml(toml::value::Datetime),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Toml(dt) => dt.to_string(),
    };
    text.parse()
        .map_err(|e| serde::de::Error::custom(format!("invalid date `{text}`: {e}")))
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            start: NaiveDate::from_ymd_opt(2022, 2, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2022, 4, 30).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngagementConfig {
    pub alpha: f64,
    pub lag_bin_days: f64,
    pub top_hashtags: usize,
    pub crosstab_top: usize,
}

impl Default for EngagementConfig {
    fn default() -> Self {
        EngagementConfig {
            alpha: 0.01,
            lag_bin_days: 1.0,
            top_hashtags: 20,
            crosstab_top: 10,
        }
    }
}

/// Transform applied to daily counts before VAR estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesInput {
    Raw,
    Rolling7,
    Log1p,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CausalityConfig {
    pub input: SeriesInput,
    pub include_retweets: bool,
    pub max_lag: usize,
    /// Fixed lag order; chosen by AIC up to `max_lag` when absent.
    pub lag: Option<usize>,
    pub horizon: usize,
    pub bootstrap_draws: usize,
    pub adf_max_lag: usize,
    /// Cholesky ordering, first series is not moved contemporaneously by the others.
    pub ordering: Vec<String>,
}

impl Default for CausalityConfig {
    fn default() -> Self {
        CausalityConfig {
            input: SeriesInput::Raw,
            include_retweets: true,
            max_lag: 7,
            lag: None,
            horizon: 14,
            bootstrap_draws: 1000,
            adf_max_lag: 7,
            ordering: vec!["disinformation".into(), "debunk".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopicsConfig {
    pub k: usize,
    /// Inclusive `[lo, hi]`; when set, k is chosen by silhouette and `k` is ignored.
    pub k_range: Option<[usize; 2]>,
    pub max_iter: usize,
    pub normalize: bool,
    pub top_words: usize,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig {
            k: 6,
            k_range: None,
            max_iter: 300,
            normalize: true,
            top_words: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupConfig {
    pub threshold: f64,
    pub sweep: Vec<f64>,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            threshold: 0.8,
            sweep: vec![0.6, 0.7, 0.8, 0.9],
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Reads and validates a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let cfg = Self::parse(&text, &base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn window(&self) -> Result<DateWindow> {
        DateWindow::new(self.window.start, self.window.end)
    }

    /// Checks everything and reports all problems together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let i = &self.inputs;
        if i.claimreview.is_none() && i.euvsdisinfo.is_none() {
            problems.push("inputs: at least one of `claimreview` or `euvsdisinfo` is required".to_string());
        }
        let paths = [
            ("inputs.claimreview", i.claimreview.as_ref()),
            ("inputs.euvsdisinfo", i.euvsdisinfo.as_ref()),
            ("inputs.posts", Some(&i.posts)),
            ("inputs.keywords", Some(&i.keywords)),
            ("inputs.embeddings", i.embeddings.as_ref()),
            ("inputs.gazetteer", i.gazetteer.as_ref()),
        ];
        for (key, p) in paths {
            if let Some(p) = p {
                let full = self.resolve(p);
                if !full.is_file() {
                    problems.push(format!("{key}: file not found: {}", full.display()));
                }
            }
        }
        if self.window.start > self.window.end {
            problems.push(format!(
                "window: start {} is after end {}",
                self.window.start, self.window.end
            ));
        }
        let e = &self.engagement;
        if !(e.alpha > 0.0 && e.alpha < 1.0) {
            problems.push(format!("engagement.alpha must lie in (0, 1), got {}", e.alpha));
        }
        if !(e.lag_bin_days > 0.0 && e.lag_bin_days.is_finite()) {
            problems.push(format!(
                "engagement.lag_bin_days must be positive, got {}",
                e.lag_bin_days
            ));
        }
        let c = &self.causality;
        if c.max_lag == 0 {
            problems.push("causality.max_lag must be ≥ 1".to_string());
        }
        if let Some(lag) = c.lag {
            if lag == 0 {
                problems.push("causality.lag must be ≥ 1".to_string());
            }
        }
        if c.horizon == 0 {
            problems.push("causality.horizon must be ≥ 1".to_string());
        }
        let mut ordering = c.ordering.clone();
        ordering.sort();
        if ordering != ["debunk", "disinformation"] {
            problems.push(format!(
                "causality.ordering must list `disinformation` and `debunk` once each, got {:?}",
                c.ordering
            ));
        }
        let t = &self.topics;
        match t.k_range {
            Some([lo, hi]) if lo < 2 || hi < lo => {
                problems.push(format!("topics.k_range [{lo}, {hi}] must satisfy 2 ≤ lo ≤ hi"));
            }
            None if t.k == 0 => problems.push("topics.k must be ≥ 1".to_string()),
            _ => {}
        }
        if t.max_iter == 0 {
            problems.push("topics.max_iter must be ≥ 1".to_string());
        }
        let d = &self.dedup;
        for (key, v) in
            std::iter::once(("dedup.threshold", d.threshold)).chain(d.sweep.iter().map(|v| ("dedup.sweep", *v)))
        {
            if !(v > 0.0 && v <= 1.0) {
                problems.push(format!("{key}: {v} not in (0, 1]"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// SHA-256 over the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex(&Sha256::digest(&json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
