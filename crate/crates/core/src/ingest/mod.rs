//! Debunk, disinformation-link and post records: loading, filtering, link
//! matching and author-country resolution.

mod gazetteer;
mod loaders;
mod url;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use self::gazetteer::{normalize_place, resolve_all, resolve_country, Gazetteer};
pub use self::loaders::{load_debunks, load_posts, write_posts_csv, DebunkFormat, LoadOutcome};
pub use self::url::{extract_domain, is_absolute_url, normalize_url};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamLabel {
    Disinformation,
    Debunk,
}

impl StreamLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamLabel::Disinformation => "disinformation",
            StreamLabel::Debunk => "debunk",
        }
    }
}

impl fmt::Display for StreamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DebunkSource {
    ClaimReview,
    Euvsdisinfo,
}

/// One published fact-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebunkRecord {
    pub id: String,
    pub url: String,
    pub publisher_domain: String,
    pub date_published: NaiveDate,
    pub claim_text: String,
    #[serde(default)]
    pub claim_text_en: Option<String>,
    pub language: String,
    pub disinfo_links: Vec<String>,
    #[serde(default)]
    pub affected_countries: Option<Vec<String>>,
    pub source: DebunkSource,
}

impl DebunkRecord {
    /// Text used for keyword filtering and topic modeling.
    pub fn filter_text(&self) -> &str {
        self.claim_text_en.as_deref().unwrap_or(&self.claim_text)
    }
}

/// One social-media post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub author_followers: u64,
    pub author_tweet_count: u64,
    pub retweet_count: u64,
    pub reply_count: u64,
    pub like_count: u64,
    pub quote_count: u64,
    #[serde(default)]
    pub author_location_raw: Option<String>,
    pub shared_urls: Vec<String>,
    pub hashtags: Vec<String>,
    pub is_retweet: bool,
    #[serde(default)]
    pub stream_label: Option<StreamLabel>,
}

impl PostRecord {
    pub fn date(&self) -> NaiveDate {
        self.created_at.date_naive()
    }
}

/// Inclusive calendar-date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::Precondition(format!("window end {end} precedes start {start}")));
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn len_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len_days() as i64).map(move |d| self.start + Duration::days(d))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub id: String,
    pub reason: String,
}

impl Reject {
    pub fn new(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Reject {
            id: id.into(),
            reason: reason.into(),
        }
    }
}

pub fn write_rejects_csv(rejects: &[Reject]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "reason"])
        .map_err(|e| Error::format("rejects", e))?;
    for r in rejects {
        w.write_record([&r.id, &r.reason])
            .map_err(|e| Error::format("rejects", e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("rejects", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<DebunkRecord>,
    pub rejects: Vec<Reject>,
    pub warnings: Vec<String>,
}

/// NFC + lowercase, the form both keywords and claim text are compared in.
pub fn normalize_text(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase()
}

/// Keeps records dated inside `window` whose claim text (English translation when
/// present) contains at least one keyword as a case-insensitive substring.
pub fn filter_records(records: Vec<DebunkRecord>, keywords: &[String], window: &DateWindow) -> Result<FilterOutcome> {
    let needles: Vec<String> = keywords
        .iter()
        .map(|k| normalize_text(k.trim()))
        .filter(|k| !k.is_empty())
        .collect();
    if needles.is_empty() {
        return Err(Error::Precondition("keyword list is empty".into()));
    }
    let mut out = FilterOutcome::default();
    for record in records {
        if !window.contains(record.date_published) {
            out.rejects.push(Reject::new(&record.id, "out_of_window"));
            continue;
        }
        let hay = normalize_text(record.filter_text());
        if needles.iter().any(|n| hay.contains(n.as_str())) {
            out.kept.push(record);
        } else {
            out.rejects.push(Reject::new(&record.id, "no_keyword_match"));
        }
    }
    if out.kept.is_empty() {
        out.warnings
            .push("keyword/window filter removed every record".to_string());
    }
    Ok(out)
}

/// Reads a keyword list: one keyword per line, `#` comments allowed.
pub fn load_keywords(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// A post labeled with the stream it belongs to and the debunks whose links it shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPost {
    pub post: PostRecord,
    pub stream_label: StreamLabel,
    pub debunk_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchDiagnostics {
    pub posts_in: usize,
    pub unmatched: usize,
    pub matched_disinformation: usize,
    pub matched_debunk: usize,
    /// Posts sharing links from both streams; each appears once per stream.
    pub both_streams: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MatchOutcome {
    pub matched: Vec<MatchedPost>,
    pub diagnostics: MatchDiagnostics,
}

/// Attaches stream labels and debunk ids to posts by normalized-URL equality.
///
/// Debunk article URLs define the debunk stream; the disinformation links listed
/// in each debunk define the disinformation stream. A post sharing links from both
/// yields one [`MatchedPost`] per stream.
pub fn match_posts_to_links(posts: &[PostRecord], debunks: &[DebunkRecord]) -> MatchOutcome {
    let mut index: BTreeMap<String, Vec<(StreamLabel, &str)>> = BTreeMap::new();
    for d in debunks {
        if let Ok(u) = normalize_url(&d.url) {
            index.entry(u).or_default().push((StreamLabel::Debunk, &d.id));
        }
        for link in &d.disinfo_links {
            if let Ok(u) = normalize_url(link) {
                index.entry(u).or_default().push((StreamLabel::Disinformation, &d.id));
            }
        }
    }

    let mut out = MatchOutcome::default();
    out.diagnostics.posts_in = posts.len();
    for post in posts {
        let mut per_stream: BTreeMap<StreamLabel, BTreeSet<&str>> = BTreeMap::new();
        for shared in &post.shared_urls {
            let Ok(u) = normalize_url(shared) else { continue };
            if let Some(hits) = index.get(&u) {
                for (label, id) in hits {
                    per_stream.entry(*label).or_default().insert(id);
                }
            }
        }
        if per_stream.is_empty() {
            out.diagnostics.unmatched += 1;
            continue;
        }
        if per_stream.len() > 1 {
            out.diagnostics.both_streams += 1;
        }
        for (label, ids) in per_stream {
            match label {
                StreamLabel::Disinformation => out.diagnostics.matched_disinformation += 1,
                StreamLabel::Debunk => out.diagnostics.matched_debunk += 1,
            }
            let mut labeled = post.clone();
            labeled.stream_label = Some(label);
            out.matched.push(MatchedPost {
                post: labeled,
                stream_label: label,
                debunk_ids: ids.into_iter().map(str::to_string).collect(),
            });
        }
    }
    out
}

/// Posts whose creation date lies inside the window.
pub fn posts_in_window<'a>(
    posts: &'a [MatchedPost],
    window: &'a DateWindow,
) -> impl Iterator<Item = &'a MatchedPost> + 'a {
    posts.iter().filter(move |p| window.contains(p.post.date()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    pub(crate) fn debunk(id: &str, date: &str, claim: &str) -> DebunkRecord {
        DebunkRecord {
            id: id.into(),
            url: format!("https://factcheck.example/{id}"),
            publisher_domain: "factcheck.example".into(),
            date_published: date.parse().unwrap(),
            claim_text: claim.into(),
            claim_text_en: None,
            language: "en".into(),
            disinfo_links: vec![format!("https://disinfo.example/{id}")],
            affected_countries: None,
            source: DebunkSource::ClaimReview,
        }
    }

    fn post(id: &str, urls: &[&str]) -> PostRecord {
        PostRecord {
            id: id.into(),
            created_at: Utc.with_ymd_and_hms(2022, 3, 1, 12, 0, 0).unwrap(),
            text: String::new(),
            author_followers: 1,
            author_tweet_count: 1,
            retweet_count: 0,
            reply_count: 0,
            like_count: 0,
            quote_count: 0,
            author_location_raw: None,
            shared_urls: urls.iter().map(|u| u.to_string()).collect(),
            hashtags: vec![],
            is_retweet: false,
            stream_label: None,
        }
    }

    fn window() -> DateWindow {
        DateWindow::new("2022-02-01".parse().unwrap(), "2022-04-30".parse().unwrap()).unwrap()
    }

    #[test]
    fn keyword_substring_keeps() {
        let r = debunk("a", "2022-03-01", "Ukraine biolabs funded by the US");
        let out = filter_records(vec![r], &["ukraine".into(), "kyiv".into()], &window()).unwrap();
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn out_of_window_dropped_with_reason() {
        let r = debunk("a", "2022-05-15", "Ukraine");
        let out = filter_records(vec![r], &["ukraine".into()], &window()).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.rejects, vec![Reject::new("a", "out_of_window")]);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn translated_text_takes_precedence() {
        let mut r = debunk("a", "2022-03-01", "Die Ukraine hat Biolabore");
        r.claim_text_en = Some("Biolabs exist".into());
        let out = filter_records(vec![r.clone()], &["ukraine".into()], &window()).unwrap();
        assert!(out.kept.is_empty());
        r.claim_text_en = None;
        let out = filter_records(vec![r], &["ukraine".into()], &window()).unwrap();
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn ten_record_fixture_keeps_exactly_four() {
        let rows = [
            ("r0", "2022-02-01", "Kyiv was shelled"),
            ("r1", "2022-01-31", "Ukraine army"),
            ("r2", "2022-03-10", "Vaccines cause magnetism"),
            ("r3", "2022-03-11", "ZELENSKY fled to Poland"),
            ("r4", "2022-04-30", "ukrainian refugees"),
            ("r5", "2022-05-01", "Kyiv"),
            ("r6", "2022-02-20", "Election fraud in Brazil"),
            ("r7", "2022-04-01", "The moon landing"),
            ("r8", "2022-04-02", "Ukraine biolabs"),
            ("r9", "2022-02-14", "Crimea referendum"),
        ];
        let records: Vec<_> = rows.iter().map(|(i, d, c)| debunk(i, d, c)).collect();
        let kw: Vec<String> = ["ukrain", "kyiv", "zelensky"].map(String::from).to_vec();
        let out = filter_records(records, &kw, &window()).unwrap();
        let kept: Vec<&str> = out.kept.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(kept, ["r0", "r3", "r4", "r8"]);
        assert_eq!(out.rejects.len(), 6);
    }

    #[test]
    fn empty_keyword_list_is_error() {
        assert!(filter_records(vec![], &[], &window()).is_err());
        assert!(filter_records(vec![], &["  ".into()], &window()).is_err());
    }

    #[test]
    fn direct_disinformation_match() {
        let d = debunk("d1", "2022-03-01", "x");
        let p = post("p1", &["https://disinfo.example/d1"]);
        let out = match_posts_to_links(&[p], &[d]);
        assert_eq!(out.matched.len(), 1);
        assert_eq!(out.matched[0].stream_label, StreamLabel::Disinformation);
        assert_eq!(out.matched[0].post.stream_label, Some(StreamLabel::Disinformation));
        assert_eq!(out.matched[0].debunk_ids, vec!["d1".to_string()]);
    }

    #[test]
    fn six_post_fixture_with_tracking_params() {
        let d1 = debunk("d1", "2022-03-01", "x");
        let d2 = debunk("d2", "2022-03-02", "y");
        let posts = vec![
            post(
                "p1",
                &["https://disinfo.example/d1?utm_source=twitter&utm_medium=social"],
            ),
            post("p2", &["https://disinfo.example/d2?fbclid=IwAR0abc#comments"]),
            post("p3", &["https://unrelated.example/x"]),
            post("p4", &["https://factcheck.example/d1"]),
            post("p5", &[]),
            post("p6", &["https://disinfo.example/d2", "https://factcheck.example/d2"]),
        ];
        let out = match_posts_to_links(&posts, &[d1, d2]);
        let ids: Vec<(&str, StreamLabel)> = out
            .matched
            .iter()
            .map(|m| (m.post.id.as_str(), m.stream_label))
            .collect();
        assert_eq!(
            ids,
            [
                ("p1", StreamLabel::Disinformation),
                ("p2", StreamLabel::Disinformation),
                ("p4", StreamLabel::Debunk),
                ("p6", StreamLabel::Disinformation),
                ("p6", StreamLabel::Debunk),
            ]
        );
        assert_eq!(out.diagnostics.unmatched, 2);
        assert_eq!(out.diagnostics.both_streams, 1);
    }

    proptest! {
        #[test]
        fn filter_is_idempotent_and_partitions(
            specs in prop::collection::vec((0u8..4, 0i64..120, 0usize..5), 0..30)
        ) {
            let words = ["Ukraine war", "kyiv news", "football", "weather today", "Crimea"];
            let base: NaiveDate = "2022-01-15".parse().unwrap();
            let records: Vec<DebunkRecord> = specs.iter().enumerate().map(|(i, (_, off, w))| {
                let date = base + Duration::days(*off);
                debunk(&format!("r{i}"), &date.to_string(), words[*w])
            }).collect();
            let kw: Vec<String> = vec!["ukraine".into(), "kyiv".into()];
            let once = filter_records(records.clone(), &kw, &window()).unwrap();
            prop_assert_eq!(once.kept.len() + once.rejects.len(), records.len());
            let mut seen: Vec<&str> = once.kept.iter().map(|r| r.id.as_str())
                .chain(once.rejects.iter().map(|r| r.id.as_str())).collect();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), records.len());
            let twice = filter_records(once.kept.clone(), &kw, &window()).unwrap();
            prop_assert_eq!(twice.kept, once.kept);
            prop_assert!(twice.rejects.is_empty());
        }

        #[test]
        fn labels_only_from_matched_urls(n_posts in 1usize..12, pick in prop::collection::vec(0usize..6, 12)) {
            let debunks = vec![debunk("d1", "2022-03-01", "x"), debunk("d2", "2022-03-02", "y")];
            let pool = [
                "https://disinfo.example/d1", "https://factcheck.example/d2",
                "https://other.example/1", "https://other.example/2",
                "https://disinfo.example/d2?utm_campaign=z", "https://nowhere.example/",
            ];
            let posts: Vec<PostRecord> = (0..n_posts).map(|i| post(&format!("p{i}"), &[pool[pick[i]]])).collect();
            let out = match_posts_to_links(&posts, &debunks);
            for m in &out.matched {
                let expected_urls: Vec<String> = debunks.iter().flat_map(|d| match m.stream_label {
                    StreamLabel::Debunk => vec![normalize_url(&d.url).unwrap()],
                    StreamLabel::Disinformation => d.disinfo_links.iter().map(|l| normalize_url(l).unwrap()).collect(),
                }).collect();
                prop_assert!(m.post.shared_urls.iter().any(|u| expected_urls.contains(&normalize_url(u).unwrap())));
            }
        }
    }
}
