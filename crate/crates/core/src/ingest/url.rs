use url::Url;

use crate::error::{Error, Result};

fn parse_absolute(raw: &str) -> Result<Url> {
    let trimmed = raw.trim();
    let parsed = Url::parse(trimmed).map_err(|e| Error::Url {
        url: raw.to_string(),
        reason: e.to_string(),
    })?;
    if parsed.cannot_be_a_base() || parsed.host_str().is_none_or(str::is_empty) {
        return Err(Error::Url {
            url: raw.to_string(),
            reason: "not an absolute URL with a host".into(),
        });
    }
    Ok(parsed)
}

/// Lowercase host with any leading `www.` / `m.` labels removed. Other subdomains
/// are kept, so `arabic.rt.com` stays `arabic.rt.com`.
pub fn extract_domain(raw: &str) -> Result<String> {
    let parsed = parse_absolute(raw)?;
    let mut host = parsed.host_str().unwrap_or_default().to_lowercase();
    while let Some(rest) = host.strip_prefix("www.").or_else(|| host.strip_prefix("m.")) {
        if rest.is_empty() {
            break;
        }
        host = rest.to_string();
    }
    Ok(host)
}

fn is_tracking_param(key: &str) -> bool {
    let key = key.to_ascii_lowercase();
    key.starts_with("utm_") || key == "fbclid"
}

/// Canonical form used for link matching: fragment dropped, `utm_*` and `fbclid`
/// query parameters removed, remaining parameters kept in their original order.
pub fn normalize_url(raw: &str) -> Result<String> {
    let mut parsed = parse_absolute(raw)?;
    parsed.set_fragment(None);
    if parsed.query().is_some() {
        let kept: Vec<(String, String)> = parsed
            .query_pairs()
            .filter(|(k, _)| !is_tracking_param(k))
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect();
        if kept.is_empty() {
            parsed.set_query(None);
        } else {
            parsed.query_pairs_mut().clear().extend_pairs(kept);
        }
    }
    Ok(parsed.to_string())
}

/// True when `raw` parses as an absolute URL with a host.
pub fn is_absolute_url(raw: &str) -> bool {
    parse_absolute(raw).is_ok()
}
