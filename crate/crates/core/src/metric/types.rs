use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Result-list size assumed when a source does not say otherwise.
pub const DEFAULT_EXPECTED_COUNT: u32 = 50;

/// Identity of a news item: the exact (url, title) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemKey {
    pub url: String,
    pub title: String,
}

/// One ranked news result. `url` and `title` are expected to be normalized already.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultItem {
    pub rank: u32,
    pub url: String,
    pub title: String,
}

impl ResultItem {
    pub fn new(rank: u32, url: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            rank,
            url: url.into(),
            title: title.into(),
        }
    }

    pub fn key(&self) -> ItemKey {
        ItemKey {
            url: self.url.clone(),
            title: self.title.clone(),
        }
    }
}

macro_rules! labelled_enum {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => $label:literal $(| $alias:literal)*),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(from = "String", into = "String")]
        pub enum $name {
            $($variant,)+
            Other(String),
        }

        impl $name {
            pub fn label(&self) -> &str {
                match self {
                    $(Self::$variant => $label,)+
                    Self::Other(name) => name,
                }
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                let lower = raw.trim().to_ascii_lowercase();
                match lower.as_str() {
                    $($label $(| $alias)* => Self::$variant,)+
                    _ => Self::Other(raw.trim().to_string()),
                }
            }
        }

        impl From<String> for $name {
            fn from(raw: String) -> Self {
                Self::from(raw.as_str())
            }
        }

        impl From<$name> for String {
            fn from(value: $name) -> Self {
                value.label().to_string()
            }
        }

        impl FromStr for $name {
            type Err = std::convert::Infallible;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Ok(Self::from(s))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

labelled_enum! {
    /// Search engine that produced a result page.
    Engine {
        Google => "google",
        Bing => "bing",
        DuckDuckGo => "duckduckgo" | "ddg",
        Yahoo => "yahoo" | "yahoo!",
        Baidu => "baidu",
    }
}

labelled_enum! {
    /// Location an agent searched from.
    Region {
        Oregon => "oregon",
        Frankfurt => "frankfurt",
    }
}

labelled_enum! {
    Browser {
        Chrome => "chrome",
        Firefox => "firefox",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundStatus {
    Complete,
    Incomplete,
    Missing,
}

impl RoundStatus {
    /// Status implied by how many items a round collected.
    pub fn from_count(collected: usize, expected_count: u32) -> Self {
        if collected == 0 {
            Self::Missing
        } else if collected < expected_count as usize {
            Self::Incomplete
        } else {
            Self::Complete
        }
    }
}

impl fmt::Display for RoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Complete => "complete",
            Self::Incomplete => "incomplete",
            Self::Missing => "missing",
        })
    }
}

/// Experimental coordinates of one round of one (agent, query term) stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotMeta {
    pub agent_id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    pub category: Option<String>,
    pub query_term: String,
    pub round_index: u64,
    pub captured_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("expected_count must be at least 1")]
    ZeroExpectedCount,
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
    #[error("item at position {position} has rank 0")]
    ZeroRank { position: usize },
    #[error("ranks must be strictly increasing (rank {rank} follows {previous})")]
    RanksNotIncreasing { previous: u32, rank: u32 },
    #[error("rank {rank} exceeds expected_count {expected_count}")]
    RankBeyondExpected { rank: u32, expected_count: u32 },
    #[error("item at rank {rank} has an empty {field}")]
    EmptyItemField { rank: u32, field: &'static str },
    #[error("identity at rank {rank} duplicates an earlier item")]
    DuplicateIdentity { rank: u32 },
    #[error("status {recorded} does not match {collected} items of {expected_count} expected")]
    StatusMismatch {
        recorded: RoundStatus,
        collected: usize,
        expected_count: u32,
    },
}

/// The ordered item list one agent collected for one query in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundSnapshot {
    pub meta: SnapshotMeta,
    pub expected_count: u32,
    pub items: Vec<ResultItem>,
    pub status: RoundStatus,
}

impl RoundSnapshot {
    /// Builds a snapshot from raw ranked items, applying the ingestion rules:
    /// items are ordered by rank, ranks beyond `expected_count` are truncated,
    /// repeated identities keep only their first (best-ranked) occurrence, and
    /// the status is derived from the surviving count.
    pub fn from_items(
        meta: SnapshotMeta,
        expected_count: u32,
        mut items: Vec<ResultItem>,
    ) -> Result<Self, SnapshotError> {
        if expected_count == 0 {
            return Err(SnapshotError::ZeroExpectedCount);
        }
        items.sort_by_key(|item| item.rank);
        items.retain(|item| item.rank <= expected_count);

        let mut seen = HashSet::with_capacity(items.len());
        let mut kept: Vec<ResultItem> = Vec::with_capacity(items.len());
        for (position, item) in items.into_iter().enumerate() {
            if item.rank == 0 {
                return Err(SnapshotError::ZeroRank { position });
            }
            if let Some(last) = kept.last() {
                if last.rank == item.rank {
                    return Err(SnapshotError::RanksNotIncreasing {
                        previous: last.rank,
                        rank: item.rank,
                    });
                }
            }
            if seen.insert(item.key()) {
                kept.push(item);
            }
        }

        let status = RoundStatus::from_count(kept.len(), expected_count);
        let snapshot = Self {
            meta,
            expected_count,
            items: kept,
            status,
        };
        snapshot.validate()?;
        Ok(snapshot)
    }

    /// A round for which nothing was collected.
    pub fn missing(meta: SnapshotMeta, expected_count: u32) -> Self {
        Self {
            meta,
            expected_count: expected_count.max(1),
            items: Vec::new(),
            status: RoundStatus::Missing,
        }
    }

    pub fn is_missing(&self) -> bool {
        self.status == RoundStatus::Missing
    }

    pub fn collected_ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().map(|item| item.rank)
    }

    /// Checks every structural invariant of a snapshot.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        if self.expected_count == 0 {
            return Err(SnapshotError::ZeroExpectedCount);
        }
        let meta = &self.meta;
        if meta.agent_id.trim().is_empty() {
            return Err(SnapshotError::EmptyField("agent_id"));
        }
        if meta.query_term.trim().is_empty() {
            return Err(SnapshotError::EmptyField("query_term"));
        }
        if meta.engine.label().is_empty() {
            return Err(SnapshotError::EmptyField("engine"));
        }
        if meta.region.label().is_empty() {
            return Err(SnapshotError::EmptyField("region"));
        }
        if meta.browser.label().is_empty() {
            return Err(SnapshotError::EmptyField("browser"));
        }

        let mut previous: Option<u32> = None;
        let mut seen = HashSet::with_capacity(self.items.len());
        for (position, item) in self.items.iter().enumerate() {
            if item.rank == 0 {
                return Err(SnapshotError::ZeroRank { position });
            }
            if let Some(prev) = previous {
                if item.rank <= prev {
                    return Err(SnapshotError::RanksNotIncreasing {
                        previous: prev,
                        rank: item.rank,
                    });
                }
            }
            if item.rank > self.expected_count {
                return Err(SnapshotError::RankBeyondExpected {
                    rank: item.rank,
                    expected_count: self.expected_count,
                });
            }
            if item.url.is_empty() {
                return Err(SnapshotError::EmptyItemField {
                    rank: item.rank,
                    field: "url",
                });
            }
            if item.title.is_empty() {
                return Err(SnapshotError::EmptyItemField {
                    rank: item.rank,
                    field: "title",
                });
            }
            if !seen.insert(item.key()) {
                return Err(SnapshotError::DuplicateIdentity { rank: item.rank });
            }
            previous = Some(item.rank);
        }

        let derived = RoundStatus::from_count(self.items.len(), self.expected_count);
        if derived != self.status {
            return Err(SnapshotError::StatusMismatch {
                recorded: self.status,
                collected: self.items.len(),
                expected_count: self.expected_count,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn meta() -> SnapshotMeta {
        SnapshotMeta {
            agent_id: "a1".into(),
            engine: Engine::Bing,
            region: Region::Oregon,
            browser: Browser::Firefox,
            category: Some("us".into()),
            query_term: "joe biden".into(),
            round_index: 0,
            captured_at: Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap(),
        }
    }

    #[test]
    fn labels_round_trip_and_fall_back_to_other() {
        assert_eq!(Engine::from("DuckDuckGo"), Engine::DuckDuckGo);
        assert_eq!(Engine::from("Yahoo!"), Engine::Yahoo);
        assert_eq!(Engine::from("AltaVista"), Engine::Other("AltaVista".into()));
        assert_eq!(Region::from("frankfurt").to_string(), "frankfurt");
        assert_eq!(Browser::from(" Chrome ").label(), "chrome");
    }

    #[test]
    fn from_items_dedups_keeping_first_occurrence() {
        let items = vec![
            ResultItem::new(1, "https://a.example/1", "One"),
            ResultItem::new(2, "https://a.example/2", "Two"),
            ResultItem::new(3, "https://a.example/1", "One"),
        ];
        let snap = RoundSnapshot::from_items(meta(), 3, items).unwrap();
        assert_eq!(snap.items.len(), 2);
        assert_eq!(snap.collected_ranks().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(snap.status, RoundStatus::Incomplete);
    }

    #[test]
    fn from_items_truncates_past_expected_count() {
        let items = (1..=5)
            .map(|r| ResultItem::new(r, format!("https://a.example/{r}"), "t"))
            .collect();
        let snap = RoundSnapshot::from_items(meta(), 3, items).unwrap();
        assert_eq!(snap.items.len(), 3);
        assert_eq!(snap.status, RoundStatus::Complete);
    }

    #[test]
    fn case_variants_are_distinct_identities() {
        let items = vec![
            ResultItem::new(1, "https://a.example/1", "Biden wins"),
            ResultItem::new(2, "https://a.example/1", "biden wins"),
        ];
        let snap = RoundSnapshot::from_items(meta(), 2, items).unwrap();
        assert_eq!(snap.status, RoundStatus::Complete);
    }

    #[test]
    fn validate_rejects_status_mismatch_and_bad_ranks() {
        let mut snap =
            RoundSnapshot::from_items(meta(), 2, vec![ResultItem::new(1, "https://a.example/1", "x")]).unwrap();
        snap.status = RoundStatus::Complete;
        assert!(matches!(snap.validate(), Err(SnapshotError::StatusMismatch { .. })));

        snap.status = RoundStatus::Incomplete;
        snap.items.push(ResultItem::new(1, "https://a.example/2", "y"));
        assert!(matches!(snap.validate(), Err(SnapshotError::RanksNotIncreasing { .. })));

        let missing = RoundSnapshot::missing(meta(), 50);
        assert!(missing.validate().is_ok());
        assert!(missing.is_missing());
    }

    #[test]
    fn duplicate_rank_is_rejected() {
        let items = vec![
            ResultItem::new(1, "https://a.example/1", "x"),
            ResultItem::new(1, "https://a.example/2", "y"),
        ];
        assert!(RoundSnapshot::from_items(meta(), 5, items).is_err());
    }
}
