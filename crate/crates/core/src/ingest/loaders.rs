//! File loaders.
//!
//! ClaimReview feeds are JSON: either a bare array of `ClaimReview` objects, an
//! object with a `claimReviews` array, or a Data Commons style feed
//! (`dataFeedElement[].item[]`). Each review needs `url`, `datePublished` and
//! `claimReviewed`; disinformation links come from `itemReviewed.appearance[]`,
//! `itemReviewed.firstAppearance` and `itemReviewed.url`. The optional
//! `claimReviewedEn` field carries a producer-supplied English translation.
//!
//! EUvsDisinfo-style tables are CSV with header
//! `id,url,date_published,claim_text,claim_text_en,language,disinfo_links,affected_countries`
//! where the two list columns are `|`-separated.
//!
//! Posts are CSV with header
//! `id,created_at,text,author_followers,author_tweet_count,retweet_count,reply_count,like_count,quote_count,author_location,shared_urls,hashtags,is_retweet`
//! (`|`-separated lists, RFC 3339 timestamps), or a JSON array of post objects.

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::Deserialize;
use serde_json::Value;

use super::{extract_domain, is_absolute_url, DebunkRecord, DebunkSource, PostRecord, Reject};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DebunkFormat {
    ClaimreviewJson,
    EuvsdisinfoTable,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub records: Vec<DebunkRecord>,
    pub rejects: Vec<Reject>,
    /// Ids of accepted records without any disinformation link.
    pub linkless: Vec<String>,
}

impl LoadOutcome {
    fn accept(&mut self, record: DebunkRecord, seen: &mut HashSet<String>) {
        if !seen.insert(record.id.clone()) {
            self.rejects.push(Reject::new(&record.id, "duplicate_id"));
            return;
        }
        if record.disinfo_links.is_empty() {
            self.linkless.push(record.id.clone());
        }
        self.records.push(record);
    }
}

pub fn load_debunks(path: &Path, format: DebunkFormat) -> Result<LoadOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    match format {
        DebunkFormat::ClaimreviewJson => parse_claimreview(&text, &origin),
        DebunkFormat::EuvsdisinfoTable => parse_euvsdisinfo(&text, &origin),
    }
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Some(d);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc).date_naive());
    }
    raw.get(..10)
        .and_then(|p| NaiveDate::parse_from_str(p, "%Y-%m-%d").ok())
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(n) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(n.and_utc());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|n| n.and_utc())
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn str_field<'a>(v: &'a Value, key: &str) -> Option<&'a str> {
    v.get(key)
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn language_of(v: &Value) -> String {
    match v.get("inLanguage") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
        Some(Value::Object(o)) => o
            .get("alternateName")
            .or_else(|| o.get("name"))
            .and_then(Value::as_str)
            .unwrap_or("und")
            .to_string(),
        _ => "und".to_string(),
    }
}

fn collect_urls(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.trim().to_string()),
        Value::Array(items) => items.iter().for_each(|i| collect_urls(i, out)),
        Value::Object(o) => {
            if let Some(u) = o.get("url") {
                collect_urls(u, out);
            }
        }
        _ => {}
    }
}

fn reviewed_links(review: &Value) -> Vec<String> {
    let mut links = Vec::new();
    if let Some(item) = review.get("itemReviewed") {
        for key in ["appearance", "firstAppearance"] {
            if let Some(v) = item.get(key) {
                collect_urls(v, &mut links);
            }
        }
        if let Some(u) = item.get("url") {
            collect_urls(u, &mut links);
        }
    }
    let mut seen = HashSet::new();
    links.retain(|l| !l.is_empty() && seen.insert(l.clone()));
    links
}

fn claimreview_items(root: &Value) -> Option<Vec<&Value>> {
    match root {
        Value::Array(items) => Some(items.iter().collect()),
        Value::Object(o) => {
            if let Some(Value::Array(items)) = o.get("claimReviews") {
                return Some(items.iter().collect());
            }
            if let Some(Value::Array(feed)) = o.get("dataFeedElement") {
                let mut out = Vec::new();
                for element in feed {
                    match element.get("item") {
                        Some(Value::Array(items)) => out.extend(items.iter()),
                        Some(item @ Value::Object(_)) => out.push(item),
                        _ => {}
                    }
                }
                return Some(out);
            }
            None
        }
        _ => None,
    }
}

pub(crate) fn parse_claimreview(text: &str, origin: &str) -> Result<LoadOutcome> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::format(
            format!("{origin}:{}:{}", e.line(), e.column()),
            format!("invalid ClaimReview JSON: {e}"),
        )
    })?;
    let items = claimreview_items(&root).ok_or_else(|| {
        Error::format(
            origin,
            "expected an array of ClaimReview objects, `claimReviews` or `dataFeedElement`",
        )
    })?;

    let mut out = LoadOutcome::default();
    let mut seen = HashSet::new();
    for (index, review) in items.into_iter().enumerate() {
        let url = str_field(review, "url");
        let id = str_field(review, "identifier")
            .or_else(|| str_field(review, "@id"))
            .or(url)
            .map(str::to_string)
            .unwrap_or_else(|| format!("{origin}#{index}"));

        let Some(url) = url else {
            out.rejects.push(Reject::new(id, "missing_url"));
            continue;
        };
        let Ok(publisher_domain) = extract_domain(url) else {
            out.rejects.push(Reject::new(id, "invalid_url"));
            continue;
        };
        let Some(date) = str_field(review, "datePublished").and_then(parse_date) else {
            out.rejects.push(Reject::new(id, "missing_or_invalid_date"));
            continue;
        };
        let Some(claim) = str_field(review, "claimReviewed") else {
            out.rejects.push(Reject::new(id, "missing_claim_text"));
            continue;
        };
        let links = reviewed_links(review);
        if let Some(bad) = links.iter().find(|l| !is_absolute_url(l)) {
            out.rejects.push(Reject::new(id, format!("invalid_disinfo_link:{bad}")));
            continue;
        }
        let record = DebunkRecord {
            id,
            url: url.to_string(),
            publisher_domain,
            date_published: date,
            claim_text: claim.to_string(),
            claim_text_en: str_field(review, "claimReviewedEn").map(str::to_string),
            language: language_of(review),
            disinfo_links: links,
            affected_countries: None,
            source: DebunkSource::ClaimReview,
        };
        out.accept(record, &mut seen);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct EuvsdisinfoRow {
    #[serde(default)]
    id: String,
    #[serde(default)]
    url: String,
    #[serde(default)]
    date_published: String,
    #[serde(default)]
    claim_text: String,
    #[serde(default)]
    claim_text_en: String,
    #[serde(default)]
    language: String,
    #[serde(default)]
    disinfo_links: String,
    #[serde(default)]
    affected_countries: String,
}

pub(crate) fn parse_euvsdisinfo(text: &str, origin: &str) -> Result<LoadOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = LoadOutcome::default();
    let mut seen = HashSet::new();
    for (index, row) in reader.deserialize::<EuvsdisinfoRow>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(index as u64 + 2, |p| p.line());
            Error::format(format!("{origin}:{line}"), e)
        })?;
        let id = if row.id.is_empty() {
            format!("{origin}#{index}")
        } else {
            row.id.clone()
        };
        if row.url.is_empty() {
            out.rejects.push(Reject::new(id, "missing_url"));
            continue;
        }
        let Ok(publisher_domain) = extract_domain(&row.url) else {
            out.rejects.push(Reject::new(id, "invalid_url"));
            continue;
        };
        let Some(date) = parse_date(&row.date_published) else {
            out.rejects.push(Reject::new(id, "missing_or_invalid_date"));
            continue;
        };
        if row.claim_text.is_empty() {
            out.rejects.push(Reject::new(id, "missing_claim_text"));
            continue;
        }
        let links = split_list(&row.disinfo_links);
        if let Some(bad) = links.iter().find(|l| !is_absolute_url(l)) {
            out.rejects.push(Reject::new(id, format!("invalid_disinfo_link:{bad}")));
            continue;
        }
        let record = DebunkRecord {
            id,
            url: row.url,
            publisher_domain,
            date_published: date,
            claim_text: row.claim_text,
            claim_text_en: Some(row.claim_text_en).filter(|s| !s.is_empty()),
            language: if row.language.is_empty() {
                "und".into()
            } else {
                row.language
            },
            disinfo_links: links,
            affected_countries: Some(split_list(&row.affected_countries)),
            source: DebunkSource::Euvsdisinfo,
        };
        out.accept(record, &mut seen);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct PostRow {
    id: String,
    created_at: String,
    #[serde(default)]
    text: String,
    author_followers: u64,
    author_tweet_count: u64,
    retweet_count: u64,
    reply_count: u64,
    like_count: u64,
    quote_count: u64,
    #[serde(default)]
    author_location: String,
    #[serde(default)]
    shared_urls: String,
    #[serde(default)]
    hashtags: String,
    #[serde(default)]
    is_retweet: String,
}

fn normalize_hashtag(raw: &str) -> String {
    raw.trim().trim_start_matches('#').to_lowercase()
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Some(false),
        "1" | "true" | "yes" => Some(true),
        _ => None,
    }
}

/// Loads posts from CSV, or from a JSON array when the path ends in `.json`.
/// Rows with invalid timestamps or flags are rejected; structural errors fail.
pub fn load_posts(path: &Path) -> Result<(Vec<PostRecord>, Vec<Reject>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    if path.extension().is_some_and(|e| e == "json") {
        let mut posts: Vec<PostRecord> = serde_json::from_str(&text)
            .map_err(|e| Error::format(format!("{origin}:{}:{}", e.line(), e.column()), e))?;
        for p in &mut posts {
            p.hashtags = p.hashtags.iter().map(|h| normalize_hashtag(h)).collect();
        }
        return Ok((posts, Vec::new()));
    }
    parse_posts_csv(&text, &origin)
}

pub(crate) fn parse_posts_csv(text: &str, origin: &str) -> Result<(Vec<PostRecord>, Vec<Reject>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut posts = Vec::new();
    let mut rejects = Vec::new();
    for (index, row) in reader.deserialize::<PostRow>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(index as u64 + 2, |p| p.line());
            Error::format(format!("{origin}:{line}"), e)
        })?;
        let Some(created_at) = parse_timestamp(&row.created_at) else {
            rejects.push(Reject::new(row.id, "invalid_timestamp"));
            continue;
        };
        let Some(is_retweet) = parse_bool(&row.is_retweet) else {
            rejects.push(Reject::new(row.id, "invalid_is_retweet"));
            continue;
        };
        posts.push(PostRecord {
            id: row.id,
            created_at,
            text: row.text,
            author_followers: row.author_followers,
            author_tweet_count: row.author_tweet_count,
            retweet_count: row.retweet_count,
            reply_count: row.reply_count,
            like_count: row.like_count,
            quote_count: row.quote_count,
            author_location_raw: Some(row.author_location).filter(|s| !s.is_empty()),
            shared_urls: split_list(&row.shared_urls),
            hashtags: split_list(&row.hashtags)
                .iter()
                .map(|h| normalize_hashtag(h))
                .filter(|h| !h.is_empty())
                .collect(),
            is_retweet,
            stream_label: None,
        });
    }
    Ok((posts, rejects))
}

/// Serializes posts in the CSV layout accepted by [`load_posts`].
pub fn write_posts_csv(posts: &[PostRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::format("posts csv", e);
    w.write_record([
        "id",
        "created_at",
        "text",
        "author_followers",
        "author_tweet_count",
        "retweet_count",
        "reply_count",
        "like_count",
        "quote_count",
        "author_location",
        "shared_urls",
        "hashtags",
        "is_retweet",
    ])
    .map_err(err)?;
    for p in posts {
        w.write_record([
            p.id.clone(),
            p.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            p.text.clone(),
            p.author_followers.to_string(),
            p.author_tweet_count.to_string(),
            p.retweet_count.to_string(),
            p.reply_count.to_string(),
            p.like_count.to_string(),
            p.quote_count.to_string(),
            p.author_location_raw.clone().unwrap_or_default(),
            p.shared_urls.join("|"),
            p.hashtags.join("|"),
            p.is_retweet.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("posts csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FEED: &str = r#"{
      "dataFeedElement": [
        {"item": [{
          "@type": "ClaimReview",
          "url": "https://www.politifact.com/factchecks/2022/mar/01/a",
          "datePublished": "2022-03-01",
          "claimReviewed": "Ukraine runs US-funded biolabs",
          "inLanguage": "en",
          "itemReviewed": {"appearance": [{"url": "https://www.facebook.com/p/1"}, {"url": "https://tiktok.com/@x/2"}]}
        }]},
        {"item": [{
          "@type": "ClaimReview",
          "url": "https://dpa-factchecking.com/b",
          "datePublished": "2022-03-05T10:00:00Z",
          "claimReviewed": "Video shows a jet shot down over Kyiv",
          "claimReviewedEn": "Video shows a jet shot down over Kyiv",
          "inLanguage": {"@type": "Language", "alternateName": "de"},
          "itemReviewed": {"firstAppearance": {"url": "https://twitter.com/x/status/3"}}
        }]},
        {"item": [{
          "@type": "ClaimReview",
          "url": "https://factly.in/c",
          "datePublished": "2022-03-07",
          "claimReviewed": "Zelensky fled Kyiv",
          "itemReviewed": {"@type": "Claim"}
        }]}
      ]
    }"#;

    #[test]
    fn claimreview_three_reviews_one_linkless() {
        let out = parse_claimreview(FEED, "feed.json").unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.rejects.is_empty());
        assert_eq!(out.linkless, vec!["https://factly.in/c".to_string()]);
        assert_eq!(out.records[0].disinfo_links.len(), 2);
        assert_eq!(out.records[0].publisher_domain, "politifact.com");
        assert_eq!(out.records[1].language, "de");
        assert_eq!(out.records[1].date_published.to_string(), "2022-03-05");
        assert_eq!(out.records[2].language, "und");
    }

    #[test]
    fn claimreview_missing_fields_are_rejects() {
        let feed = r#"[
          {"url": "https://a.example/1", "claimReviewed": "x"},
          {"url": "https://a.example/2", "datePublished": "2022-03-01"},
          {"datePublished": "2022-03-01", "claimReviewed": "y"},
          {"url": "https://a.example/3", "datePublished": "2022-03-01", "claimReviewed": "z"},
          {"url": "https://a.example/3", "datePublished": "2022-03-02", "claimReviewed": "dup"}
        ]"#;
        let out = parse_claimreview(feed, "f.json").unwrap();
        assert_eq!(out.records.len(), 1);
        let reasons: Vec<&str> = out.rejects.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(
            reasons,
            [
                "missing_or_invalid_date",
                "missing_claim_text",
                "missing_url",
                "duplicate_id"
            ]
        );
        assert_eq!(out.rejects[2].id, "f.json#2");
    }

    #[test]
    fn claimreview_syntax_error_has_position() {
        let err = parse_claimreview("[\n{\"url\": }", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.json:2:"), "{msg}");
    }

    #[test]
    fn euvsdisinfo_five_rows_with_countries() {
        let table = "\
id,url,date_published,claim_text,claim_text_en,language,disinfo_links,affected_countries
e1,https://euvsdisinfo.eu/report/1,2022-02-10,Claim one,,ru,https://sputniknews.com/a|https://rt.com/b,Ukraine|Russia
e2,https://euvsdisinfo.eu/report/2,2022-02-11,Claim two,,ru,https://arabic.rt.com/c,Ukraine
e3,https://euvsdisinfo.eu/report/3,2022-02-12,Claim three,Claim three en,de,https://de.news-front.info/d,Germany|Ukraine
e4,https://euvsdisinfo.eu/report/4,2022-03-01,Claim four,,en,,United States
e5,https://euvsdisinfo.eu/report/5,2022-03-02,Claim five,,es,https://www.facebook.com/e,Mexico|United States|Venezuela
";
        let out = parse_euvsdisinfo(table, "eu.csv").unwrap();
        assert_eq!(out.records.len(), 5);
        let counts: Vec<usize> = out
            .records
            .iter()
            .map(|r| r.affected_countries.as_ref().unwrap().len())
            .collect();
        assert_eq!(counts, [2, 1, 2, 1, 3]);
        assert_eq!(out.linkless, vec!["e4".to_string()]);
        assert_eq!(out.records[2].claim_text_en.as_deref(), Some("Claim three en"));
    }

    #[test]
    fn posts_csv_parses_and_normalizes() {
        let csv = "\
id,created_at,text,author_followers,author_tweet_count,retweet_count,reply_count,like_count,quote_count,author_location,shared_urls,hashtags,is_retweet
p1,2022-03-01T10:00:00Z,hello,10,20,1,2,3,4,\"Moscow, Russia\",https://a.example/x|https://b.example/y,#Ukraine|FoxNews,false
p2,not-a-date,hi,1,1,0,0,0,0,,,,true
p3,2022-03-02 11:00:00,,1,1,0,0,0,0,,,,1
";
        let (posts, rejects) = parse_posts_csv(csv, "posts.csv").unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(rejects, vec![Reject::new("p2", "invalid_timestamp")]);
        assert_eq!(posts[0].hashtags, ["ukraine", "foxnews"]);
        assert_eq!(posts[0].shared_urls.len(), 2);
        assert_eq!(posts[0].author_location_raw.as_deref(), Some("Moscow, Russia"));
        assert!(posts[1].is_retweet);
    }

    #[test]
    fn posts_csv_round_trip() {
        let csv = "\
id,created_at,text,author_followers,author_tweet_count,retweet_count,reply_count,like_count,quote_count,author_location,shared_urls,hashtags,is_retweet
p1,2022-03-01T10:00:00Z,\"hello, world\",10,20,1,2,3,4,Kyiv,https://a.example/x,ukraine,false
";
        let (posts, _) = parse_posts_csv(csv, "p").unwrap();
        let written = write_posts_csv(&posts).unwrap();
        let (again, _) = parse_posts_csv(&written, "p").unwrap();
        assert_eq!(posts, again);
    }
}
