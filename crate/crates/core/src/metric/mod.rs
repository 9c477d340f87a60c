//! Rank weights, new-item detection and per-round novelty.

mod history;
mod types;
mod weights;

use thiserror::Error;

pub use history::{detect_new, round_novelty, AgentTermHistory, DiscardReason, LastRoundStatus, NoveltyResult};
pub use types::{
    Browser, Engine, ItemKey, Region, ResultItem, RoundSnapshot, RoundStatus, SnapshotError, SnapshotMeta,
    DEFAULT_EXPECTED_COUNT,
};
pub use weights::{rank_weight, rescaled_weight, RankWeights};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("list size must be at least 1")]
    EmptyList,
    #[error("rank {rank} outside 1..={list_size}")]
    RankOutOfRange { rank: u32, list_size: u32 },
    #[error("rank {rank} was not collected")]
    RankNotCollected { rank: u32 },
    #[error("no ranks were collected")]
    NothingCollected,
    #[error("stream {agent_id}/{query_term}: round {got} does not follow round {last}")]
    OutOfOrder {
        agent_id: String,
        query_term: String,
        last: u64,
        got: u64,
    },
    #[error("snapshot for stream {found} applied to history of {expected}")]
    StreamMismatch { expected: String, found: String },
    #[error("round {round_index} is missing and has no novelty; record a gap instead")]
    MissingSnapshot { round_index: u64 },
}
