//! Archived result pages on disk.
//!
//! An archive is a directory with an `index.jsonl` manifest; each line gives
//! the coordinates of one captured page and the page's path relative to the
//! directory. A `null` or absent `file` marks a round whose fetch failed.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Browser, Engine, Region, SnapshotMeta};

pub const INDEX_FILE: &str = "index.jsonl";

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Entry { path: String, line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveEntry {
    #[serde(default)]
    pub file: Option<String>,
    pub agent_id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub query_term: String,
    pub round_index: u64,
    pub captured_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_count: Option<u32>,
}

impl ArchiveEntry {
    pub fn meta(&self) -> SnapshotMeta {
        SnapshotMeta {
            agent_id: self.agent_id.clone(),
            engine: self.engine.clone(),
            region: self.region.clone(),
            browser: self.browser.clone(),
            category: self.category.clone(),
            query_term: self.query_term.clone(),
            round_index: self.round_index,
            captured_at: self.captured_at,
        }
    }

    pub fn expected_count_or(&self, default: u32) -> u32 {
        self.expected_count.unwrap_or(default)
    }
}

#[derive(Debug, Clone)]
pub struct Archive {
    root: PathBuf,
    entries: Vec<ArchiveEntry>,
    by_round: HashMap<(String, String, u64), usize>,
}

impl Archive {
    pub fn open(root: &Path) -> Result<Self, ArchiveError> {
        let index_path = root.join(INDEX_FILE);
        let io_err = |source| ArchiveError::Io {
            path: index_path.display().to_string(),
            source,
        };
        let file = std::fs::File::open(&index_path).map_err(io_err)?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ArchiveEntry = serde_json::from_str(&line).map_err(|e| ArchiveError::Entry {
                path: index_path.display().to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            entries.push(entry);
        }
        let by_round = entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.agent_id.clone(), e.query_term.clone(), e.round_index), i))
            .collect();
        Ok(Self {
            root: root.to_path_buf(),
            entries,
            by_round,
        })
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn find(&self, agent_id: &str, query_term: &str, round_index: u64) -> Option<&ArchiveEntry> {
        self.by_round
            .get(&(agent_id.to_string(), query_term.to_string(), round_index))
            .map(|i| &self.entries[*i])
    }

    /// Page text for `entry`, or `None` when the entry records a failed fetch.
    pub fn read_page(&self, entry: &ArchiveEntry) -> Result<Option<String>, ArchiveError> {
        let Some(file) = &entry.file else {
            return Ok(None);
        };
        let path = self.root.join(file);
        let bytes = std::fs::read(&path).map_err(|source| ArchiveError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Some(String::from_utf8_lossy(&bytes).into_owned()))
    }
}
