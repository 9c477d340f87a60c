//! Declarative engine profiles.
//!
//! Each profile tells the parser how to find organic news results on one
//! engine's result page. Profiles are loaded from TOML so layout drift is
//! handled by editing config; see `docs/profiles.md` for the schema.

use std::path::Path;

use scraper::Selector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::Engine;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid profile file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("profile for {engine} has no extraction rules")]
    NoRules { engine: Engine },
    #[error("profile for {engine}: bad selector {selector:?}: {reason}")]
    BadSelector {
        engine: Engine,
        selector: String,
        reason: String,
    },
    #[error("profile for {engine} declared more than once")]
    Duplicate { engine: Engine },
    #[error("profile for {engine}: max_results must be at least 1")]
    ZeroMaxResults { engine: Engine },
}

fn default_url_attribute() -> String {
    "href".to_string()
}

fn default_max_results() -> u32 {
    100
}

/// One way of locating result blocks on a page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionRule {
    /// Selector matching one node per organic result, in page order.
    pub container: String,
    /// Selector, relative to the container, for the result link.
    pub link: String,
    /// Selector for the title node. Falls back to the link text when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    /// Read the title from this attribute instead of the node text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_attribute: Option<String>,
    /// Overrides the profile's `url_attribute` for this rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url_attribute: Option<String>,
    /// Query parameter carrying the real target of a redirect link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unwrap_param: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineProfile {
    pub engine: Engine,
    #[serde(default = "default_url_attribute")]
    pub url_attribute: String,
    #[serde(default = "default_max_results")]
    pub max_results: u32,
    /// Base for resolving relative result links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    /// Search URL template with a `{query}` placeholder, used by live fetchers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_url: Option<String>,
    /// Selector that positively identifies a page with no results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_marker: Option<String>,
    #[serde(rename = "rule")]
    pub rules: Vec<ExtractionRule>,
}

pub(crate) struct CompiledRule<'p> {
    pub rule: &'p ExtractionRule,
    pub container: Selector,
    pub link: Selector,
    pub title: Option<Selector>,
}

pub(crate) struct CompiledProfile<'p> {
    pub rules: Vec<CompiledRule<'p>>,
    pub empty_marker: Option<Selector>,
}

impl EngineProfile {
    fn selector(&self, raw: &str) -> Result<Selector, ProfileError> {
        Selector::parse(raw).map_err(|err| ProfileError::BadSelector {
            engine: self.engine.clone(),
            selector: raw.to_string(),
            reason: err.to_string(),
        })
    }

    pub(crate) fn compile(&self) -> Result<CompiledProfile<'_>, ProfileError> {
        if self.rules.is_empty() {
            return Err(ProfileError::NoRules {
                engine: self.engine.clone(),
            });
        }
        if self.max_results == 0 {
            return Err(ProfileError::ZeroMaxResults {
                engine: self.engine.clone(),
            });
        }
        let rules = self
            .rules
            .iter()
            .map(|rule| {
                Ok(CompiledRule {
                    rule,
                    container: self.selector(&rule.container)?,
                    link: self.selector(&rule.link)?,
                    title: rule.title.as_deref().map(|t| self.selector(t)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, ProfileError>>()?;
        let empty_marker = self.empty_marker.as_deref().map(|m| self.selector(m)).transpose()?;
        Ok(CompiledProfile { rules, empty_marker })
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        self.compile().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    #[serde(rename = "profile", default)]
    profiles: Vec<EngineProfile>,
}

/// All profiles loaded for a run, one per engine.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileSet {
    profiles: Vec<EngineProfile>,
}

impl ProfileSet {
    pub fn new(profiles: Vec<EngineProfile>) -> Result<Self, ProfileError> {
        for (i, profile) in profiles.iter().enumerate() {
            profile.validate()?;
            if profiles[..i].iter().any(|p| p.engine == profile.engine) {
                return Err(ProfileError::Duplicate {
                    engine: profile.engine.clone(),
                });
            }
        }
        Ok(Self { profiles })
    }

    pub fn from_toml(text: &str) -> Result<Self, ProfileError> {
        let file: ProfileFile = toml::from_str(text)?;
        Self::new(file.profiles)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn get(&self, engine: &Engine) -> Option<&EngineProfile> {
        self.profiles.iter().find(|p| &p.engine == engine)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EngineProfile> {
        self.profiles.iter()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}
