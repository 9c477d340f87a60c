use thiserror::Error;
use unicode_normalization::UnicodeNormalization;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("empty url")]
    EmptyUrl,
    #[error("not an absolute url: {0}")]
    NotAbsolute(String),
    #[error("url has no host: {0}")]
    NoHost(String),
}

/// Canonical form of a result URL.
///
/// Lowercases scheme and host and drops the fragment. Path, query string and
/// percent-encoding are kept byte for byte, since query parameters can tell
/// genuinely different pieces apart (live blogs, pagination).
pub fn normalize_url(raw: &str) -> Result<String, NormalizeError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(NormalizeError::EmptyUrl);
    }
    let parsed = Url::parse(trimmed).map_err(|_| NormalizeError::NotAbsolute(trimmed.to_string()))?;
    if parsed.cannot_be_a_base() || parsed.host_str().is_none_or(str::is_empty) {
        return Err(NormalizeError::NoHost(trimmed.to_string()));
    }
    let Some((scheme, rest)) = trimmed.split_once("://") else {
        return Err(NormalizeError::NotAbsolute(trimmed.to_string()));
    };

    let rest = rest.split_once('#').map_or(rest, |(before, _)| before);
    let authority_end = rest.find(['/', '?']).unwrap_or(rest.len());
    let (authority, tail) = rest.split_at(authority_end);
    let (userinfo, host) = match authority.rfind('@') {
        Some(at) => authority.split_at(at + 1),
        None => ("", authority),
    };
    if host.is_empty() {
        return Err(NormalizeError::NoHost(trimmed.to_string()));
    }

    Ok(format!(
        "{}://{}{}{}",
        scheme.to_ascii_lowercase(),
        userinfo,
        host.to_lowercase(),
        tail
    ))
}

/// Canonical form of a result title: NFC, trimmed, inner whitespace runs
/// collapsed to one space. Case is preserved.
pub fn normalize_title(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}
