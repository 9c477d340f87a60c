//! Longitudinal novelty auditing for news-search result pages.
//!
//! The crate is split into four layers:
//!
//! * [`metric`]: rank weights, new-item detection and per-round novelty.
//! * [`ingest`]: result-page parsing, identity normalization and the
//!   line-delimited snapshot log.
//! * [`collection`]: schedules, fetchers and the synthetic stream generator.
//! * [`analysis`]: periods, rolling means, bootstrap intervals, unique-item
//!   counts and report export.

pub mod analysis;
pub mod collection;
pub mod ingest;
pub mod metric;
pub mod pipeline;

pub use metric::{
    AgentTermHistory, Browser, DiscardReason, Engine, ItemKey, NoveltyResult, Region, ResultItem, RoundSnapshot,
    RoundStatus, SnapshotMeta,
};
