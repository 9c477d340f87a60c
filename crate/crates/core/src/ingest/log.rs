//! The `.snapshots.jsonl` snapshot log.
//!
//! One JSON record per line, UTF-8, timestamps in RFC 3339 UTC. Reading
//! validates every record, quarantines the ones that break an invariant,
//! groups the rest per (agent, query term) stream in round order and fills
//! interior round gaps with synthesized missing rounds.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::metric::{
    Browser, Engine, Region, ResultItem, RoundSnapshot, RoundStatus, SnapshotMeta, DEFAULT_EXPECTED_COUNT,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: unsupported schema_version {found:?} (expected {SCHEMA_VERSION:?})")]
    SchemaVersion { line: usize, found: String },
    #[error("line {line}: not valid UTF-8")]
    Encoding { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn default_expected_count() -> u32 {
    DEFAULT_EXPECTED_COUNT
}

/// Wire form of a [`RoundSnapshot`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRecord {
    pub schema_version: String,
    pub agent_id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub query_term: String,
    pub round_index: u64,
    pub captured_at: DateTime<Utc>,
    #[serde(default = "default_expected_count")]
    pub expected_count: u32,
    pub status: RoundStatus,
    #[serde(default)]
    pub items: Vec<ResultItem>,
}

impl From<&RoundSnapshot> for SnapshotRecord {
    fn from(snapshot: &RoundSnapshot) -> Self {
        let meta = &snapshot.meta;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            agent_id: meta.agent_id.clone(),
            engine: meta.engine.clone(),
            region: meta.region.clone(),
            browser: meta.browser.clone(),
            category: meta.category.clone(),
            query_term: meta.query_term.clone(),
            round_index: meta.round_index,
            captured_at: meta.captured_at,
            expected_count: snapshot.expected_count,
            status: snapshot.status,
            items: snapshot.items.clone(),
        }
    }
}

impl SnapshotRecord {
    pub fn into_snapshot(self) -> Result<RoundSnapshot, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {:?}", self.schema_version));
        }
        let snapshot = RoundSnapshot {
            meta: SnapshotMeta {
                agent_id: self.agent_id,
                engine: self.engine,
                region: self.region,
                browser: self.browser,
                category: self.category,
                query_term: self.query_term,
                round_index: self.round_index,
                captured_at: self.captured_at,
            },
            expected_count: self.expected_count,
            items: self.items,
            status: self.status,
        };
        snapshot.validate().map_err(|e| e.to_string())?;
        Ok(snapshot)
    }
}

/// A log line that failed validation, kept for the rejects sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRecord {
    pub line: usize,
    pub reason: String,
    /// The record as read, or the raw text when it was not a JSON object.
    pub record: Value,
}

impl RejectedRecord {
    /// Record shape plus `line` and `reason` fields.
    pub fn to_json(&self) -> Value {
        let mut out = match &self.record {
            Value::Object(map) => map.clone(),
            other => {
                let mut map = serde_json::Map::new();
                map.insert("raw".into(), other.clone());
                map
            }
        };
        out.insert("line".into(), Value::from(self.line));
        out.insert("reason".into(), Value::from(self.reason.clone()));
        Value::Object(out)
    }
}

/// Every round of one (agent, query term) stream in strictly increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotStream {
    pub agent_id: String,
    pub query_term: String,
    pub snapshots: Vec<RoundSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotLog {
    pub streams: Vec<SnapshotStream>,
    pub rejects: Vec<RejectedRecord>,
}

impl SnapshotLog {
    pub fn snapshots(&self) -> impl Iterator<Item = &RoundSnapshot> {
        self.streams.iter().flat_map(|s| s.snapshots.iter())
    }

    pub fn synthesized_missing(&self) -> usize {
        self.snapshots().filter(|s| s.is_missing()).count()
    }
}

/// Reads a snapshot log. Fails only on I/O errors, undecodable text or a
/// schema-version mismatch; anything else is quarantined in `rejects`.
pub fn read_snapshots<R: BufRead>(reader: R) -> Result<SnapshotLog, LogError> {
    let mut streams: BTreeMap<(String, String), Vec<(usize, RoundSnapshot)>> = BTreeMap::new();
    let mut rejects = Vec::new();

    for (index, line) in reader.split(b'\n').enumerate() {
        let line_no = index + 1;
        let bytes = line?;
        let text = std::str::from_utf8(&bytes).map_err(|_| LogError::Encoding { line: line_no })?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let value: Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(err) => {
                rejects.push(RejectedRecord {
                    line: line_no,
                    reason: format!("invalid json: {err}"),
                    record: Value::from(text),
                });
                continue;
            }
        };
        match value.get("schema_version") {
            Some(Value::String(v)) if v == SCHEMA_VERSION => {}
            Some(other) => {
                return Err(LogError::SchemaVersion {
                    line: line_no,
                    found: other.as_str().map_or_else(|| other.to_string(), str::to_string),
                })
            }
            None => {
                rejects.push(RejectedRecord {
                    line: line_no,
                    reason: "missing schema_version".into(),
                    record: value,
                });
                continue;
            }
        }
        let parsed = serde_json::from_value::<SnapshotRecord>(value.clone())
            .map_err(|e| e.to_string())
            .and_then(SnapshotRecord::into_snapshot);
        match parsed {
            Ok(snapshot) => streams
                .entry((snapshot.meta.agent_id.clone(), snapshot.meta.query_term.clone()))
                .or_default()
                .push((line_no, snapshot)),
            Err(reason) => rejects.push(RejectedRecord {
                line: line_no,
                reason,
                record: value,
            }),
        }
    }

    let mut out = Vec::with_capacity(streams.len());
    for ((agent_id, query_term), mut rounds) in streams {
        rounds.sort_by_key(|(line, s)| (s.meta.round_index, *line));
        let mut ordered: Vec<RoundSnapshot> = Vec::with_capacity(rounds.len());
        for (line, snapshot) in rounds {
            if let Some(first) = ordered.first() {
                let reason = if first.meta.engine != snapshot.meta.engine
                    || first.meta.region != snapshot.meta.region
                    || first.meta.browser != snapshot.meta.browser
                    || first.meta.category != snapshot.meta.category
                {
                    Some("stream coordinates differ from the stream's first round".to_string())
                } else if ordered
                    .last()
                    .is_some_and(|l| l.meta.round_index == snapshot.meta.round_index)
                {
                    Some(format!("duplicate round_index {}", snapshot.meta.round_index))
                } else {
                    None
                };
                if let Some(reason) = reason {
                    rejects.push(RejectedRecord {
                        line,
                        reason,
                        record: serde_json::to_value(SnapshotRecord::from(&snapshot)).expect("record serializes"),
                    });
                    continue;
                }
            }
            if let Some(previous) = ordered.last() {
                let gap = fill_gap(previous, &snapshot);
                ordered.extend(gap);
            }
            ordered.push(snapshot);
        }
        out.push(SnapshotStream {
            agent_id,
            query_term,
            snapshots: ordered,
        });
    }
    rejects.sort_by_key(|r| r.line);
    Ok(SnapshotLog { streams: out, rejects })
}

/// Missing rounds for every index strictly between two recorded rounds,
/// with capture times interpolated between their neighbours.
fn fill_gap(previous: &RoundSnapshot, next: &RoundSnapshot) -> Vec<RoundSnapshot> {
    let from = previous.meta.round_index;
    let to = next.meta.round_index;
    if to <= from + 1 {
        return Vec::new();
    }
    let span = (to - from) as i64;
    let elapsed = next.meta.captured_at - previous.meta.captured_at;
    (from + 1..to)
        .map(|round| {
            let step = (round - from) as i64;
            let offset = chrono::TimeDelta::milliseconds(elapsed.num_milliseconds() * step / span);
            let mut meta = previous.meta.clone();
            meta.round_index = round;
            meta.captured_at = previous.meta.captured_at + offset;
            RoundSnapshot::missing(meta, previous.expected_count)
        })
        .collect()
}

pub fn write_snapshot<W: Write>(writer: &mut W, snapshot: &RoundSnapshot) -> io::Result<()> {
    serde_json::to_writer(&mut *writer, &SnapshotRecord::from(snapshot))?;
    writer.write_all(b"\n")
}

pub fn write_snapshots<'a, W, I>(writer: &mut W, snapshots: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a RoundSnapshot>,
{
    for snapshot in snapshots {
        write_snapshot(writer, snapshot)?;
    }
    Ok(())
}

pub fn write_rejects<W: Write>(writer: &mut W, rejects: &[RejectedRecord]) -> io::Result<()> {
    for reject in rejects {
        serde_json::to_writer(&mut *writer, &reject.to_json())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
