use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::ingest::{Archive, ArchiveError, ProfileSet};
use crate::metric::{Browser, Engine, Region};

pub const DEFAULT_FETCH_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error("no page for {0}")]
    NotFound(String),
    #[error("http error: {0}")]
    Http(String),
    #[error("no search url configured for engine {0}")]
    NoSearchUrl(String),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest<'a> {
    pub agent_id: &'a str,
    pub engine: &'a Engine,
    pub region_hint: &'a Region,
    pub browser: &'a Browser,
    pub query_term: &'a str,
    pub round_index: u64,
    pub scheduled_at: DateTime<Utc>,
}

/// Source of result pages for the collection runner.
pub trait Fetcher: Sync {
    fn fetch(&self, request: &FetchRequest<'_>) -> Result<String, FetchError>;

    /// Called before each search. Real browser isolation belongs to the
    /// implementation; the default does nothing.
    fn clean_state(&self, _agent_id: &str) {}
}

/// Serves pages from an on-disk archive; see [`crate::ingest::archive`].
#[derive(Debug, Clone)]
pub struct ReplayFetcher {
    archive: Archive,
}

impl ReplayFetcher {
    pub fn open(root: &Path) -> Result<Self, ArchiveError> {
        Ok(Self {
            archive: Archive::open(root)?,
        })
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }
}

impl Fetcher for ReplayFetcher {
    fn fetch(&self, request: &FetchRequest<'_>) -> Result<String, FetchError> {
        let key = || format!("{}/{}/{}", request.agent_id, request.query_term, request.round_index);
        let entry = self
            .archive
            .find(request.agent_id, request.query_term, request.round_index)
            .ok_or_else(|| FetchError::NotFound(key()))?;
        self.archive
            .read_page(entry)?
            .ok_or_else(|| FetchError::NotFound(key()))
    }
}

/// Plain HTTP GET against each engine profile's `search_url`. No JavaScript,
/// no anti-bot handling; pages that need either will fail to parse.
pub struct HttpFetcher {
    client: reqwest::blocking::Client,
    profiles: ProfileSet,
    timeout: Duration,
}

impl HttpFetcher {
    pub fn new(profiles: ProfileSet, timeout: Duration) -> Result<Self, FetchError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent("Mozilla/5.0 (X11; Linux x86_64; rv:128.0) Gecko/20100101 Firefox/128.0")
            .build()
            .map_err(|e| FetchError::Http(e.to_string()))?;
        Ok(Self {
            client,
            profiles,
            timeout,
        })
    }

    pub fn search_url(&self, engine: &Engine, term: &str) -> Result<String, FetchError> {
        let template = self
            .profiles
            .get(engine)
            .and_then(|p| p.search_url.as_deref())
            .ok_or_else(|| FetchError::NoSearchUrl(engine.to_string()))?;
        let encoded: String = url::form_urlencoded::byte_serialize(term.as_bytes()).collect();
        Ok(template.replace("{query}", &encoded))
    }
}

fn accept_language(region: &Region) -> &'static str {
    match region {
        Region::Frankfurt => "de-DE,de;q=0.9,en;q=0.8",
        _ => "en-US,en;q=0.9",
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, request: &FetchRequest<'_>) -> Result<String, FetchError> {
        let url = self.search_url(request.engine, request.query_term)?;
        let response = self
            .client
            .get(&url)
            .header("Accept-Language", accept_language(request.region_hint))
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    FetchError::Timeout(self.timeout)
                } else {
                    FetchError::Http(e.to_string())
                }
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(FetchError::Http(format!("{url}: status {status}")));
        }
        response.text().map_err(|e| FetchError::Http(e.to_string()))
    }
}
