//! Distinct-item counts and between-term ratios.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::metric::{AgentTermHistory, Engine, ItemKey, MetricError, Region, RoundSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatioError {
    #[error("denominator pool has no items")]
    EmptyDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniqueRatio {
    pub count_a: usize,
    pub count_b: usize,
    pub ratio: f64,
}

impl UniqueRatio {
    /// Ratio rounded to two decimals.
    pub fn rounded(&self) -> f64 {
        (self.ratio * 100.0).round() / 100.0
    }
}

impl fmt::Display for UniqueRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.ratio)
    }
}

pub fn ratio_from_counts(count_a: usize, count_b: usize) -> Result<UniqueRatio, RatioError> {
    if count_b == 0 {
        return Err(RatioError::EmptyDenominator);
    }
    Ok(UniqueRatio {
        count_a,
        count_b,
        ratio: count_a as f64 / count_b as f64,
    })
}

/// Size of the union of the seen-sets of `histories`.
pub fn pooled_unique_count<'a, I>(histories: I) -> usize
where
    I: IntoIterator<Item = &'a AgentTermHistory>,
{
    let mut pool: HashSet<&ItemKey> = HashSet::new();
    for history in histories {
        pool.extend(history.seen());
    }
    pool.len()
}

/// Distinct items of pool `a` over distinct items of pool `b`, each pool
/// being the union across its agents.
pub fn unique_item_ratio(a: &[AgentTermHistory], b: &[AgentTermHistory]) -> Result<UniqueRatio, RatioError> {
    ratio_from_counts(pooled_unique_count(a), pooled_unique_count(b))
}

/// Where counting stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    All,
    /// Rounds with index at most this.
    Round(u64),
    /// Rounds captured at or before this instant.
    Time(DateTime<Utc>),
}

impl Cutoff {
    fn admits(&self, snapshot: &RoundSnapshot) -> bool {
        match self {
            Cutoff::All => true,
            Cutoff::Round(r) => snapshot.meta.round_index <= *r,
            Cutoff::Time(t) => snapshot.meta.captured_at <= *t,
        }
    }
}

/// The (engine, region, term) cell agents are pooled over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConditionKey {
    pub engine: Engine,
    pub region: Region,
    pub query_term: String,
}

/// Replays snapshots up to `cutoff` into one history per (agent, term),
/// grouped by condition. Each stream's snapshots must arrive in round order.
pub fn histories_up_to<'a, I>(
    snapshots: I,
    cutoff: Cutoff,
) -> Result<BTreeMap<ConditionKey, Vec<AgentTermHistory>>, MetricError>
where
    I: IntoIterator<Item = &'a RoundSnapshot>,
{
    let mut streams: BTreeMap<(ConditionKey, String), AgentTermHistory> = BTreeMap::new();
    for snapshot in snapshots {
        if !cutoff.admits(snapshot) {
            continue;
        }
        let key = ConditionKey {
            engine: snapshot.meta.engine.clone(),
            region: snapshot.meta.region.clone(),
            query_term: snapshot.meta.query_term.clone(),
        };
        streams
            .entry((key, snapshot.meta.agent_id.clone()))
            .or_insert_with(|| AgentTermHistory::for_snapshot(snapshot))
            .apply_round(snapshot)?;
    }
    let mut out: BTreeMap<ConditionKey, Vec<AgentTermHistory>> = BTreeMap::new();
    for ((condition, _), history) in streams {
        out.entry(condition).or_default().push(history);
    }
    Ok(out)
}
