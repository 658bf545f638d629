use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/gazetteer.tsv");

/// Place name → country lookup table.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    places: HashMap<String, String>,
    max_tokens: usize,
}

/// Lowercased, diacritic-free, whitespace-collapsed form of a place name.
pub fn normalize_place(raw: &str) -> String {
    tokenize_place(raw).join(" ")
}

fn tokenize_place(raw: &str) -> Vec<String> {
    let folded: String = raw
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect();
    folded
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl Gazetteer {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled gazetteer").expect("bundled gazetteer is well formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `place<TAB>country` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut g = Gazetteer::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (place, country) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(format!("{origin}:{}", lineno + 1), "expected `place<TAB>country`"))?;
            g.insert(place, country.trim());
        }
        Ok(g)
    }

    pub fn insert(&mut self, place: &str, country: &str) {
        let key = normalize_place(place);
        if key.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(key.split(' ').count());
        self.places.insert(key, country.to_string());
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn countries(&self) -> BTreeSet<&str> {
        self.places.values().map(String::as_str).collect()
    }

    pub fn lookup(&self, place: &str) -> Option<&str> {
        self.places.get(&normalize_place(place)).map(String::as_str)
    }
}

/// Resolves a free-text location to a country.
///
/// Every contiguous token span is tried against the gazetteer; the span with the
/// most tokens wins, and among equally long spans the rightmost one.
pub fn resolve_country(location_raw: &str, gazetteer: &Gazetteer) -> Option<String> {
    let tokens = tokenize_place(location_raw);
    let longest = gazetteer.max_tokens.min(tokens.len());
    for len in (1..=longest).rev() {
        for start in (0..=tokens.len() - len).rev() {
            let key = tokens[start..start + len].join(" ");
            if let Some(country) = gazetteer.places.get(&key) {
                return Some(country.clone());
            }
        }
    }
    None
}

/// Resolved countries for each location plus the percentage resolved.
pub fn resolve_all<'a, I>(locations: I, gazetteer: &Gazetteer) -> (Vec<Option<String>>, f64)
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let resolved: Vec<Option<String>> = locations
        .into_iter()
        .map(|loc| loc.and_then(|l| resolve_country(l, gazetteer)))
        .collect();
    let hits = resolved.iter().filter(|r| r.is_some()).count();
    let coverage = if resolved.is_empty() {
        0.0
    } else {
        100.0 * hits as f64 / resolved.len() as f64
    };
    (resolved, coverage)
}
