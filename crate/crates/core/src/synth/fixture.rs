//! Small end-to-end input set: debunks in both source formats, posts whose
//! daily counts follow [`reference_series`], a keyword list and a config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::{reference_series, simulate_posts, EngagementSpec};
use crate::error::{Error, Result};
use crate::ingest::{write_posts_csv, DateWindow, PostRecord, StreamLabel};
use crate::rng::substream;
use crate::timeseries::series_to_csv;

/// Posts per day are the reference counts divided by this.
const POST_SCALE: f64 = 4.0;

const TOPICS: [(&str, [&str; 3], [&str; 7]); 6] = [
    (
        "biolabs",
        ["biolabs", "bioweapons", "pentagon"],
        [
            "US-funded biolabs in Ukraine are developing bioweapons against Russia",
            "Pentagon biolabs in Ukraine were secretly making bioweapons near the Russian border",
            "Ukraine hides American biolabs that test pathogens on birds migrating to Russia",
            "Russia found documents proving biolabs in Kyiv worked on bioweapons",
            "Hunter Biden financed biolabs in Ukraine producing deadly pathogens",
            "Bioweapons from Ukrainian biolabs were meant to target ethnic Russians",
            "WHO told Ukraine to destroy pathogens in its biolabs to hide bioweapons",
        ],
    ),
    (
        "nazis",
        ["nazi", "denazification", "azov"],
        [
            "Ukraine is ruled by a neo-Nazi government that persecutes Russian speakers",
            "Zelensky leads a Nazi regime installed by the West in Kyiv",
            "The Azov battalion controls the Ukrainian army and spreads Nazi ideology",
            "Denazification of Ukraine is needed because Nazis run the Kyiv government",
            "Ukrainian soldiers wear Nazi symbols proving Ukraine is a Nazi state",
            "Nazis in Ukraine committed genocide against Russians in Donbas",
            "Putin says the goal of the operation is denazification of Ukraine's Nazi leadership",
        ],
    ),
    (
        "staged",
        ["staged", "bucha", "actors"],
        [
            "The Bucha massacre was staged by Ukraine with paid crisis actors",
            "Bodies in Bucha moved after Russian troops left, so the massacre was staged",
            "Mariupol maternity hospital bombing in Ukraine was staged with actors",
            "Ukraine stages civilian deaths with actors to blame Russia",
            "Video of a body moving in Bucha, Ukraine proves the scene was staged",
            "Kramatorsk station strike was staged by Ukraine using its own missile",
            "Western media use crisis actors to stage Russian attacks in Ukraine",
        ],
    ),
    (
        "refugees",
        ["refugees", "poland", "crime"],
        [
            "Ukrainian refugees in Poland are committing a wave of violent crime",
            "Refugees from Ukraine receive more benefits than Polish pensioners",
            "Ukrainian refugees in Germany attacked Russian speakers and burned their cars",
            "Poland is closing its border because Ukrainian refugees brought crime",
            "Refugees from Ukraine are mostly young men avoiding the army",
            "Ukrainian refugees are spreading diseases across Europe",
            "Crime rates doubled in cities hosting refugees from Ukraine",
        ],
    ),
    (
        "energy",
        ["sanctions", "gas", "energy"],
        [
            "Sanctions against Russia will leave Europe without gas this winter",
            "Europe will freeze because energy sanctions on Russia backfired",
            "Russian gas cut-off means European factories will close within weeks",
            "Sanctions hurt Europe more than Russia as energy prices explode",
            "Germany secretly still buys Russian gas despite the sanctions",
            "The rouble is stronger than ever, proving sanctions on Russia failed",
            "Energy shortages in Europe are caused by sanctions on Russian gas",
        ],
    ),
    (
        "nato",
        ["nato", "expansion", "provocation"],
        [
            "NATO expansion to Ukraine's borders forced Russia to defend itself",
            "NATO promised Russia it would never expand east and broke that promise",
            "NATO troops are already fighting secretly inside Ukraine",
            "Ukraine was preparing a NATO-backed attack on Donbas before February",
            "The war is a NATO provocation to weaken Russia",
            "NATO plans to put nuclear missiles in Ukraine aimed at Moscow",
            "Russia had no choice because NATO turned Ukraine into a military base",
        ],
    ),
];

/// Later rewordings of earlier claims: (topic, claim index, rewording, language, original-language text).
const DUPLICATES: [(usize, usize, &str, &str, Option<&str>); 4] = [
    (
        0,
        0,
        "US-funded biolabs in Ukraine are developing bioweapons aimed at Russia",
        "de",
        Some("Von den USA finanzierte Biolabore in der Ukraine entwickeln Biowaffen gegen Russland"),
    ),
    (
        2,
        0,
        "The Bucha massacre was staged by Ukraine using paid crisis actors",
        "en",
        None,
    ),
    (
        4,
        0,
        "Sanctions against Russia will leave Europe without any gas this winter",
        "fr",
        Some("Les sanctions contre la Russie vont laisser l'Europe sans gaz cet hiver"),
    ),
    (
        5,
        0,
        "NATO expansion to Ukraine's borders forced Russia to defend itself",
        "es",
        Some("La expansión de la OTAN hasta las fronteras de Ucrania obligó a Rusia a defenderse"),
    ),
];

const PUBLISHERS: [&str; 5] = [
    "factwatch.example",
    "checkpoint-news.example",
    "verify-desk.example",
    "truthlens.example",
    "claimcheck.example",
];
const DISINFO_SITES: [&str; 6] = [
    "newsfront.example",
    "pravda-today.example",
    "truthbomb.example",
    "realnews24.example",
    "donbass-insider.example",
    "freethinker-blog.example",
];
const LOCATIONS: [&str; 16] = [
    "Moscow, Russia",
    "Kyiv",
    "Berlin",
    "London, UK",
    "Texas",
    "California, USA",
    "Paris",
    "Warsaw, Poland",
    "Madrid",
    "Rome",
    "Minsk",
    "Toronto",
    "New York",
    "Earth",
    "somewhere over the rainbow",
    "",
];
const AFFECTED: [&[&str]; 4] = [
    &["Ukraine"],
    &["Ukraine", "Poland"],
    &["Germany"],
    &["Ukraine", "United States"],
];

pub const KEYWORDS: &str =
    "# lowercase substrings matched against claim text\nukrain\nrussia\nkyiv\nzelensk\nputin\nnato\ndonbas\nkremlin\n";

struct Debunk {
    id: String,
    url: String,
    date: NaiveDate,
    claim: String,
    claim_en: Option<String>,
    language: &'static str,
    links: Vec<String>,
    topic: usize,
    euvs: bool,
}

fn slug(text: &str) -> String {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .take(6)
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("-")
}

fn study_window() -> DateWindow {
    DateWindow::new(
        NaiveDate::from_ymd_opt(2022, 2, 1).unwrap(),
        NaiveDate::from_ymd_opt(2022, 4, 30).unwrap(),
    )
    .expect("ordered dates")
}

fn debunks(seed: u64) -> Vec<Debunk> {
    let mut rng = substream(seed, "fixture/debunks");
    let window = study_window();
    let days = window.len_days() as i64;
    let mut out: Vec<Debunk> = Vec::new();
    for (t, (_, _, claims)) in TOPICS.iter().enumerate() {
        for (c, claim) in claims.iter().enumerate() {
            let n = out.len();
            let date = window.start + Duration::days(rng.gen_range(0..days - 10));
            let euvs = c % 3 == 2;
            let id = if euvs {
                format!("EUVS-{:03}", n)
            } else {
                format!("cr-{:03}", n)
            };
            let url = if euvs {
                format!("https://euvsdisinfo.example/report/{}", slug(claim))
            } else {
                format!(
                    "https://{}/{}",
                    PUBLISHERS[rng.gen_range(0..PUBLISHERS.len())],
                    slug(claim)
                )
            };
            let links = (0..2)
                .map(|j| {
                    format!(
                        "https://{}/{}-{j}",
                        DISINFO_SITES[(t + c + j) % DISINFO_SITES.len()],
                        slug(claim)
                    )
                })
                .collect();
            out.push(Debunk {
                id,
                url,
                date,
                claim: claim.to_string(),
                claim_en: None,
                language: "en",
                links,
                topic: t,
                euvs,
            });
        }
    }
    for (k, (t, c, en, lang, original)) in DUPLICATES.iter().enumerate() {
        let source = &out[t * 7 + c];
        let date = (source.date + Duration::days(rng.gen_range(3..12))).min(window.end);
        let publisher = PUBLISHERS[(k + 2) % PUBLISHERS.len()];
        let links = vec![
            source.links[0].clone(),
            format!("https://{}/{}-dup", DISINFO_SITES[k], slug(en)),
        ];
        out.push(Debunk {
            id: format!("cr-dup-{k}"),
            url: format!("https://{publisher}/{}-{lang}", slug(en)),
            date,
            claim: original.unwrap_or(en).to_string(),
            claim_en: original.map(|_| en.to_string()),
            language: lang,
            links,
            topic: *t,
            euvs: false,
        });
    }
    out
}

fn claimreview_json(debunks: &[Debunk]) -> String {
    let mut reviews: Vec<serde_json::Value> = debunks
        .iter()
        .filter(|d| !d.euvs)
        .map(|d| {
            let mut r = json!({
                "@type": "ClaimReview",
                "identifier": d.id,
                "url": d.url,
                "datePublished": d.date.to_string(),
                "claimReviewed": d.claim,
                "inLanguage": d.language,
                "itemReviewed": {
                    "@type": "Claim",
                    "firstAppearance": {"@type": "CreativeWork", "url": d.links[0]},
                    "appearance": d.links[1..].iter().map(|l| json!({"@type": "CreativeWork", "url": l})).collect::<Vec<_>>(),
                },
                "reviewRating": {"@type": "Rating", "alternateName": "False"},
            });
            if let Some(en) = &d.claim_en {
                r["claimReviewedEn"] = json!(en);
            }
            r
        })
        .collect();
    // Filtered out by ingest: off-topic, out of window, no URL, no links.
    reviews.push(json!({
        "identifier": "cr-offtopic",
        "url": "https://factwatch.example/5g-towers-spread-viruses",
        "datePublished": "2022-03-03",
        "claimReviewed": "5G towers spread viruses through radio waves",
        "inLanguage": "en",
        "itemReviewed": {"appearance": [{"url": "https://truthbomb.example/5g-virus"}]},
    }));
    reviews.push(json!({
        "identifier": "cr-early",
        "url": "https://factwatch.example/russia-will-not-invade",
        "datePublished": "2022-01-10",
        "claimReviewed": "Russia has no troops near the border with Ukraine",
        "inLanguage": "en",
        "itemReviewed": {"appearance": [{"url": "https://newsfront.example/no-troops"}]},
    }));
    reviews.push(json!({
        "identifier": "cr-no-url",
        "datePublished": "2022-03-12",
        "claimReviewed": "Ukraine sold weapons to criminals",
    }));
    reviews.push(json!({
        "identifier": "cr-linkless",
        "url": "https://truthlens.example/zelensky-fled-kyiv",
        "datePublished": "2022-02-26",
        "claimReviewed": "Zelensky fled Kyiv on the second day of the war",
        "inLanguage": "en",
    }));
    let mut text = serde_json::to_string_pretty(&json!({ "claimReviews": reviews })).expect("json");
    text.push('\n');
    text
}

fn euvsdisinfo_csv(debunks: &[Debunk]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::format("euvsdisinfo csv", e);
    w.write_record([
        "id",
        "url",
        "date_published",
        "claim_text",
        "claim_text_en",
        "language",
        "disinfo_links",
        "affected_countries",
    ])
    .map_err(err)?;
    for (i, d) in debunks.iter().filter(|d| d.euvs).enumerate() {
        w.write_record([
            d.id.as_str(),
            &d.url,
            &d.date.to_string(),
            &d.claim,
            d.claim_en.as_deref().unwrap_or(""),
            d.language,
            &d.links.join("|"),
            &AFFECTED[(i + d.topic) % AFFECTED.len()].join("|"),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("euvsdisinfo csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Debunk a post on `day` refers to: disinformation mostly circulates
/// shortly after the debunk, debunks are shared soon after publication.
fn pick_debunk<'a, R: Rng>(
    rng: &mut R,
    debunks: &'a [Debunk],
    day: NaiveDate,
    stream: StreamLabel,
) -> Option<&'a Debunk> {
    let weights: Vec<f64> = debunks
        .iter()
        .map(|d| {
            let lag = (day - d.date).num_days() as f64;
            match stream {
                StreamLabel::Disinformation if (-7.0..=30.0).contains(&lag) => (-(lag - 2.0).abs() / 6.0).exp(),
                StreamLabel::Debunk if (0.0..=21.0).contains(&lag) => (-lag / 4.0).exp(),
                _ => 0.0,
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    for (d, w) in debunks.iter().zip(&weights) {
        if target < *w {
            return Some(d);
        }
        target -= w;
    }
    debunks.last()
}

fn posts(seed: u64, debunks: &[Debunk]) -> Result<Vec<PostRecord>> {
    let window = study_window();
    let series = reference_series(seed)?;
    let mut rng = substream(seed, "fixture/posts");
    let mut out = Vec::new();
    for (s, stream) in [StreamLabel::Disinformation, StreamLabel::Debunk]
        .into_iter()
        .enumerate()
    {
        let mean_retweets = if stream == StreamLabel::Disinformation {
            3.0
        } else {
            6.0
        };
        let per_day: Vec<usize> = (0..series.len())
            .map(|t| (series.data[(t, s)] / POST_SCALE).round() as usize)
            .collect();
        let total: usize = per_day.iter().sum();
        let spec = EngagementSpec::with_mean_retweets(stream, mean_retweets, window);
        let mut drawn = simulate_posts(&spec, total.max(1), seed)?.into_iter();
        for (t, &n) in per_day.iter().enumerate() {
            let day = window.start + Duration::days(t as i64);
            for _ in 0..n {
                let mut p = drawn.next().expect("one draw per post");
                let midnight = Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap());
                p.created_at = midnight + Duration::seconds(rng.gen_range(0..86_400));
                p.stream_label = None;
                let (url, topic) = match pick_debunk(&mut rng, debunks, day, stream) {
                    Some(d) if stream == StreamLabel::Disinformation => {
                        (d.links.choose(&mut rng).unwrap().clone(), Some(d.topic))
                    }
                    Some(d) => (d.url.clone(), Some(d.topic)),
                    None => (format!("https://news.example/story/{}", rng.gen_range(0..500)), None),
                };
                p.shared_urls = vec![if rng.gen_bool(0.15) {
                    format!("{url}?utm_source=twitter&utm_medium=social")
                } else {
                    url
                }];
                let mut tags = vec![if stream == StreamLabel::Disinformation {
                    "StandWithRussia"
                } else {
                    "FactCheck"
                }
                .to_string()];
                if let Some(t) = topic {
                    tags.push(TOPICS[t].1[rng.gen_range(0..3)].to_string());
                }
                if rng.gen_bool(0.5) {
                    tags.push("Ukraine".into());
                }
                p.text = format!(
                    "{} {}",
                    TOPICS[topic.unwrap_or(0)].0,
                    tags.iter().map(|t| format!("#{t}")).collect::<Vec<_>>().join(" ")
                );
                p.hashtags = tags.iter().map(|t| t.to_lowercase()).collect();
                p.author_location_raw =
                    Some(LOCATIONS[rng.gen_range(0..LOCATIONS.len())].to_string()).filter(|l| !l.is_empty());
                out.push(p);
            }
        }
    }
    // Unrelated traffic.
    for i in 0..60 {
        let day = window.start + Duration::days(rng.gen_range(0..window.len_days() as i64));
        let mut p = out[i * 7 % out.len()].clone();
        p.created_at = Utc.from_utc_datetime(&day.and_hms_opt(12, 0, 0).unwrap());
        p.shared_urls = vec![format!("https://news.example/story/{i}")];
        out.push(p);
    }
    out.sort_by_key(|p| p.created_at);
    for (i, p) in out.iter_mut().enumerate() {
        p.id = format!("p{i:05}");
    }
    Ok(out)
}

fn reference_columns(seed: u64) -> Result<Vec<crate::timeseries::DailySeries>> {
    let m = reference_series(seed)?;
    Ok((0..m.n_vars()).map(|j| m.column(j)).collect())
}

fn config_toml(seed: u64) -> String {
    format!(
        r#"# Mini fixture: every stage runs in a few seconds.
output_dir = "out"
seed = {seed}

[inputs]
claimreview = "claimreview.json"
euvsdisinfo = "euvsdisinfo.csv"
posts = "posts.csv"
keywords = "keywords.txt"

[window]
start = 2022-02-01
end = 2022-04-30

[engagement]
alpha = 0.01

[causality]
max_lag = 7
horizon = 14
bootstrap_draws = 200

[topics]
k = 6
max_iter = 300

[dedup]
threshold = 0.8
sweep = [0.6, 0.7, 0.8, 0.9]
"#
    )
}

/// Writes the fixture into `dir` and returns the written paths.
pub fn write_mini_fixture(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let d = debunks(seed);
    let mut posts_csv = write_posts_csv(&posts(seed, &d)?)?;
    // Two rows the loader rejects.
    posts_csv.push_str("p-bad-0,not-a-date,,1,1,0,0,0,0,,https://news.example/x,,false\n");
    posts_csv.push_str("p-bad-1,2022-03-01T10:00:00Z,,1,1,0,0,0,0,,https://news.example/y,,maybe\n");
    let files: BTreeMap<&str, String> = [
        ("config.toml", config_toml(seed)),
        ("claimreview.json", claimreview_json(&d)),
        ("euvsdisinfo.csv", euvsdisinfo_csv(&d)?),
        ("posts.csv", posts_csv),
        ("keywords.txt", KEYWORDS.to_string()),
        ("reference_series.csv", series_to_csv(&reference_columns(seed)?)),
    ]
    .into_iter()
    .collect();
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = write_mini_fixture(a.path(), 42).unwrap();
        write_mini_fixture(b.path(), 42).unwrap();
        assert_eq!(fa.len(), 6);
        for p in fa {
            let name = p.file_name().unwrap();
            assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
    }

    #[test]
    fn every_claim_mentions_a_keyword_or_is_planted_reject() {
        let kw: Vec<&str> = KEYWORDS.lines().filter(|l| !l.starts_with('#')).collect();
        for d in debunks(1) {
            let text = d.claim_en.as_deref().unwrap_or(&d.claim).to_lowercase();
            assert!(kw.iter().any(|k| text.contains(k)), "{}", d.claim);
        }
    }
}
