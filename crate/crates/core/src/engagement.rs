//! Descriptive and inferential engagement statistics for two post streams.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::ingest::{DebunkRecord, MatchedPost, PostRecord};

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Followers,
    Tweets,
    Retweets,
    Replies,
    Likes,
    QuoteCount,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Followers,
        Metric::Tweets,
        Metric::Retweets,
        Metric::Replies,
        Metric::Likes,
        Metric::QuoteCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Followers => "followers",
            Metric::Tweets => "tweets",
            Metric::Retweets => "retweets",
            Metric::Replies => "replies",
            Metric::Likes => "likes",
            Metric::QuoteCount => "quote_count",
        }
    }

    pub fn value(self, post: &PostRecord) -> f64 {
        (match self {
            Metric::Followers => post.author_followers,
            Metric::Tweets => post.author_tweet_count,
            Metric::Retweets => post.retweet_count,
            Metric::Replies => post.reply_count,
            Metric::Likes => post.like_count,
            Metric::QuoteCount => post.quote_count,
        }) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator n − 1).
    pub std: f64,
    /// Population standard deviation (denominator n).
    pub population_std: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return SampleStats {
                n,
                mean: f64::NAN,
                std: f64::NAN,
                population_std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        SampleStats {
            n,
            mean,
            std: if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 },
            population_std: (ss / n as f64).sqrt(),
        }
    }

    fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Two-sample unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Precondition(
            "welch test needs at least two observations per sample".into(),
        ));
    }
    let sa = SampleStats::of(a);
    let sb = SampleStats::of(b);
    let va = sa.variance() / sa.n as f64;
    let vb = sb.variance() / sb.n as f64;
    if va + vb == 0.0 {
        return Err(Error::Degenerate("both samples are constant".into()));
    }
    let t = (sa.mean - sb.mean) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (sa.n - 1) as f64 + vb * vb / (sb.n - 1) as f64);
    let p_value = if t == 0.0 {
        1.0
    } else {
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Degenerate(format!("t distribution: {e}")))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(WelchTest { t, df, p_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Tested {
        #[serde(flatten)]
        test: WelchTest,
        significant: bool,
    },
    Skipped {
        reason: String,
    },
}

impl TestOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            TestOutcome::Tested { test, .. } => Some(test.p_value),
            TestOutcome::Skipped { .. } => None,
        }
    }

    pub fn is_significant(&self) -> bool {
        matches!(self, TestOutcome::Tested { significant: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub a: SampleStats,
    pub b: SampleStats,
    pub test: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementSummary {
    pub label_a: String,
    pub label_b: String,
    pub alpha: f64,
    pub metrics: Vec<MetricComparison>,
}

/// Per-metric means, standard deviations and Welch tests between two streams.
pub fn metric_summary(
    posts_a: &[&PostRecord],
    posts_b: &[&PostRecord],
    labels: (&str, &str),
    alpha: f64,
) -> Result<EngagementSummary> {
    if posts_a.is_empty() || posts_b.is_empty() {
        return Err(Error::Precondition(
            "metric summary needs two non-empty post lists".into(),
        ));
    }
    let metrics = Metric::ALL
        .iter()
        .map(|&metric| {
            let a: Vec<f64> = posts_a.iter().map(|p| metric.value(p)).collect();
            let b: Vec<f64> = posts_b.iter().map(|p| metric.value(p)).collect();
            let test = match welch_t_test(&a, &b) {
                Ok(test) => TestOutcome::Tested {
                    significant: test.p_value <= alpha,
                    test,
                },
                Err(e) => TestOutcome::Skipped { reason: e.to_string() },
            };
            MetricComparison {
                metric,
                a: SampleStats::of(&a),
                b: SampleStats::of(&b),
                test,
            }
        })
        .collect();
    Ok(EngagementSummary {
        label_a: labels.0.to_string(),
        label_b: labels.1.to_string(),
        alpha,
        metrics,
    })
}

impl EngagementSummary {
    /// Table of means/stds (one decimal) and test results per metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,stream,n,mean,std,population_std,t,df,p_value,significant,note\n");
        for m in &self.metrics {
            for (label, s) in [(&self.label_a, &m.a), (&self.label_b, &m.b)] {
                let (t, df, p, sig, note) = match &m.test {
                    TestOutcome::Tested { test, significant } => (
                        format!("{:.4}", test.t),
                        format!("{:.2}", test.df),
                        format!("{:.6}", test.p_value),
                        significant.to_string(),
                        String::new(),
                    ),
                    TestOutcome::Skipped { reason } => (
                        String::new(),
                        String::new(),
                        String::new(),
                        "false".into(),
                        format!("skipped: {reason}"),
                    ),
                };
                out.push_str(&format!(
                    "{},{},{},{:.1},{:.1},{:.1},{},{},{},{},{}\n",
                    m.metric.name(),
                    label,
                    s.n,
                    s.mean,
                    s.std,
                    s.population_std,
                    t,
                    df,
                    p,
                    sig,
                    note
                ));
            }
        }
        out
    }
}

/// Biased Fisher–Pearson moment coefficient `g1 = m3 / m2^(3/2)`.
pub fn fisher_pearson_skewness(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "skewness needs at least 3 values, got {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    if m2 <= (f64::EPSILON * mean).powi(2) {
        return Err(Error::Degenerate("skewness of a zero-variance sample".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagStats {
    /// `(debunk id, mean signed lag in days)` for each debunk with matched posts.
    pub per_debunk_mean_lags: Vec<(String, f64)>,
    /// Absent when fewer than three debunks or zero variance.
    pub skewness_g1: Option<f64>,
}

impl LagStats {
    pub fn values(&self) -> Vec<f64> {
        self.per_debunk_mean_lags.iter().map(|(_, v)| *v).collect()
    }
}

/// Mean day offset of matched disinformation posts relative to each debunk's
/// publication date, on UTC calendar dates.
pub fn lag_days(debunks: &[DebunkRecord], disinfo_posts: &[&MatchedPost]) -> LagStats {
    let dates: HashMap<&str, chrono::NaiveDate> = debunks.iter().map(|d| (d.id.as_str(), d.date_published)).collect();
    let mut acc: BTreeMap<&str, (i64, usize)> = BTreeMap::new();
    for post in disinfo_posts {
        let day = post.post.date();
        for id in &post.debunk_ids {
            if let Some(&published) = dates.get(id.as_str()) {
                let e = acc.entry(id.as_str()).or_insert((0, 0));
                e.0 += (day - published).num_days();
                e.1 += 1;
            }
        }
    }
    let per_debunk_mean_lags: Vec<(String, f64)> = acc
        .into_iter()
        .map(|(id, (sum, n))| (id.to_string(), sum as f64 / n as f64))
        .collect();
    let values: Vec<f64> = per_debunk_mean_lags.iter().map(|(_, v)| *v).collect();
    LagStats {
        skewness_g1: fisher_pearson_skewness(&values).ok(),
        per_debunk_mean_lags,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges; bins are `[edge_i, edge_{i+1})`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if !(bin_width > 0.0) {
        return Err(Error::Precondition("bin width must be positive".into()));
    }
    if values.is_empty() {
        return Ok(Histogram {
            edges: vec![0.0, bin_width],
            counts: vec![0],
        });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = (min / bin_width).floor() * bin_width;
    let nbins = (((max - start) / bin_width).floor() as usize) + 1;
    let mut counts = vec![0usize; nbins];
    for v in values {
        let idx = (((v - start) / bin_width).floor() as usize).min(nbins - 1);
        counts[idx] += 1;
    }
    let edges = (0..=nbins).map(|i| start + i as f64 * bin_width).collect();
    Ok(Histogram { edges, counts })
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::format(format!("histogram line {}", i + 1), e))
            };
            if f.len() != 3 {
                return Err(Error::format(format!("histogram line {}", i + 1), "expected 3 fields"));
            }
            if edges.is_empty() {
                edges.push(parse(f[0])?);
            }
            edges.push(parse(f[1])?);
            counts.push(parse(f[2])? as usize);
        }
        Ok(Histogram { edges, counts })
    }
}

/// Most frequent hashtags, descending by count with lexicographic tie-breaking.
pub fn top_hashtags<'a, I>(posts: I, n: usize) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for post in posts {
        for tag in &post.hashtags {
            let tag = tag.trim_start_matches('#').to_lowercase();
            if !tag.is_empty() {
                *counts.entry(tag).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n.max(1));
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstabRow {
    pub affected: String,
    pub author: String,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crosstab {
    pub rows: Vec<CrosstabRow>,
    pub other_count: usize,
    pub other_percentage: f64,
    pub total: usize,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Collects `(affected country, author country)` pairs from matched posts whose
/// author country resolved and whose debunk lists affected countries.
pub fn crosstab_pairs(debunks: &[DebunkRecord], posts: &[(&MatchedPost, Option<String>)]) -> Vec<(String, String)> {
    let affected: HashMap<&str, &Vec<String>> = debunks
        .iter()
        .filter_map(|d| d.affected_countries.as_ref().map(|c| (d.id.as_str(), c)))
        .filter(|(_, c)| !c.is_empty())
        .collect();
    let mut pairs = Vec::new();
    for (post, author) in posts {
        let Some(author) = author else { continue };
        for id in &post.debunk_ids {
            if let Some(countries) = affected.get(id.as_str()) {
                for c in countries.iter() {
                    pairs.push((c.clone(), author.clone()));
                }
            }
        }
    }
    pairs
}

/// Share of each `(affected, author)` pair; the `top_n` largest are listed and
/// the rest pooled as "Other". Percentages are rounded to one decimal and the
/// "Other" share absorbs the rounding so the table sums to 100.
pub fn country_crosstab(pairs: &[(String, String)], top_n: usize) -> Crosstab {
    let total = pairs.len();
    let mut counts: HashMap<(&str, &str), usize> = HashMap::new();
    for (a, b) in pairs {
        *counts.entry((a.as_str(), b.as_str())).or_default() += 1;
    }
    let mut ranked: Vec<((&str, &str), usize)> = counts.into_iter().collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    if total == 0 {
        return Crosstab {
            rows: vec![],
            other_count: 0,
            other_percentage: 0.0,
            total,
        };
    }
    let rows: Vec<CrosstabRow> = ranked
        .iter()
        .take(top_n)
        .map(|((a, b), c)| CrosstabRow {
            affected: a.to_string(),
            author: b.to_string(),
            count: *c,
            percentage: round1(100.0 * *c as f64 / total as f64),
        })
        .collect();
    let listed: usize = rows.iter().map(|r| r.count).sum();
    let listed_pct: f64 = rows.iter().map(|r| r.percentage).sum();
    Crosstab {
        rows,
        other_count: total - listed,
        other_percentage: if total == listed {
            0.0
        } else {
            round1(100.0 - listed_pct)
        },
        total,
    }
}

impl Crosstab {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("affected_country,author_country,count,percentage\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.1}\n",
                csv_field(&r.affected),
                csv_field(&r.author),
                r.count,
                r.percentage
            ));
        }
        if self.other_count > 0 {
            out.push_str(&format!(
                "Other,Other,{},{:.1}\n",
                self.other_count, self.other_percentage
            ));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
