use scraper::{ElementRef, Html};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use super::normalize::{normalize_title, normalize_url};
use super::profile::{CompiledRule, EngineProfile, ProfileError};
use crate::metric::{ResultItem, RoundSnapshot, SnapshotError, SnapshotMeta};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no extraction rule of the {engine} profile matched the page")]
    Layout { engine: String },
    #[error("profile is for {profile} but the page was captured from {page}")]
    EngineMismatch { profile: String, page: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

/// A result block that could not be turned into an item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedItem {
    /// 1-based position of the block on the page.
    pub position: u32,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPage {
    pub snapshot: RoundSnapshot,
    pub rejected: Vec<RejectedItem>,
}

/// Extracts the ranked organic results of one page.
///
/// Rules are tried in order and the first whose container selector matches
/// anything wins. Blocks are ranked by page position; a block that fails
/// normalization is quarantined and leaves its rank uncollected. A page
/// where nothing matches is a layout error unless the profile's empty-state
/// marker is present, in which case the round is recorded as missing.
pub fn parse_serp(
    html: &str,
    profile: &EngineProfile,
    meta: SnapshotMeta,
    expected_count: u32,
) -> Result<ParsedPage, ParseError> {
    if profile.engine != meta.engine {
        return Err(ParseError::EngineMismatch {
            profile: profile.engine.to_string(),
            page: meta.engine.to_string(),
        });
    }
    let compiled = profile.compile()?;
    let layout_error = || ParseError::Layout {
        engine: profile.engine.to_string(),
    };
    if html.trim().is_empty() {
        return Err(layout_error());
    }
    let document = Html::parse_document(html);

    let matched = compiled.rules.iter().find_map(|rule| {
        let blocks: Vec<ElementRef<'_>> = document.select(&rule.container).collect();
        (!blocks.is_empty()).then_some((rule, blocks))
    });

    let Some((rule, blocks)) = matched else {
        let empty_page = compiled
            .empty_marker
            .as_ref()
            .is_some_and(|marker| document.select(marker).next().is_some());
        if empty_page {
            return Ok(ParsedPage {
                snapshot: RoundSnapshot::missing(meta, expected_count),
                rejected: Vec::new(),
            });
        }
        return Err(layout_error());
    };

    let limit = profile.max_results.min(expected_count.max(1)) as usize;
    let mut items = Vec::new();
    let mut rejected = Vec::new();
    for (index, block) in blocks.into_iter().take(limit).enumerate() {
        let position = index as u32 + 1;
        match extract_item(block, rule, profile) {
            Ok((url, title)) => items.push(ResultItem::new(position, url, title)),
            Err(reject) => rejected.push(RejectedItem { position, ..reject }),
        }
    }

    let snapshot = RoundSnapshot::from_items(meta, expected_count, items)?;
    Ok(ParsedPage { snapshot, rejected })
}

fn extract_item(
    block: ElementRef<'_>,
    rule: &CompiledRule<'_>,
    profile: &EngineProfile,
) -> Result<(String, String), RejectedItem> {
    let reject = |reason: &str, raw_url: Option<&str>, raw_title: Option<&str>| RejectedItem {
        position: 0,
        reason: reason.to_string(),
        raw_url: raw_url.map(str::to_string),
        raw_title: raw_title.map(str::to_string),
    };

    let Some(link) = block.select(&rule.link).next() else {
        return Err(reject("no link in result block", None, None));
    };
    let attribute = rule.rule.url_attribute.as_deref().unwrap_or(&profile.url_attribute);

    let title_node = match &rule.title {
        Some(selector) => block.select(selector).next(),
        None => Some(link),
    };
    let raw_title = title_node.and_then(|node| match &rule.rule.title_attribute {
        Some(attr) => node.value().attr(attr).map(str::to_string),
        None => Some(node.text().collect::<String>()),
    });

    let Some(href) = link.value().attr(attribute) else {
        return Err(reject("link has no url attribute", None, raw_title.as_deref()));
    };
    let target = resolve_target(href, profile.base_url.as_deref(), rule.rule.unwrap_param.as_deref());
    let url = match normalize_url(&target) {
        Ok(url) => url,
        Err(err) => return Err(reject(&err.to_string(), Some(href), raw_title.as_deref())),
    };

    let title = raw_title.as_deref().map(normalize_title).unwrap_or_default();
    if title.is_empty() {
        return Err(reject("empty title", Some(href), raw_title.as_deref()));
    }
    Ok((url, title))
}

/// Resolves relative links against `base` and unwraps redirect links.
/// Absolute links that need no unwrapping are returned verbatim.
fn resolve_target(href: &str, base: Option<&str>, unwrap_param: Option<&str>) -> String {
    let href = href.trim();
    let absolute = match Url::parse(href) {
        Ok(url) => Some(url),
        Err(_) => base.and_then(|b| Url::parse(b).ok()).and_then(|b| b.join(href).ok()),
    };
    let Some(absolute) = absolute else {
        return href.to_string();
    };
    if let Some(param) = unwrap_param {
        if let Some((_, target)) = absolute.query_pairs().find(|(key, _)| key == param) {
            return target.into_owned();
        }
    }
    if Url::parse(href).is_ok() {
        href.to_string()
    } else {
        absolute.to_string()
    }
}
