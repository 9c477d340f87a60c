use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::types::{ItemKey, RoundSnapshot, RoundStatus};
use super::weights::RankWeights;
use super::MetricError;

/// Status of the most recent round applied to a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LastRoundStatus {
    #[default]
    None,
    Complete,
    Incomplete,
    Missing,
}

impl From<RoundStatus> for LastRoundStatus {
    fn from(status: RoundStatus) -> Self {
        match status {
            RoundStatus::Complete => Self::Complete,
            RoundStatus::Incomplete => Self::Incomplete,
            RoundStatus::Missing => Self::Missing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    /// No earlier round of the stream collected anything.
    FirstRound,
    PriorRoundMissingOrIncomplete,
}

/// Novelty of one round, or the reason it cannot be scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoveltyResult {
    Value(f64),
    Discarded(DiscardReason),
}

impl NoveltyResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Discarded(_) => None,
        }
    }

    pub fn discard_reason(&self) -> Option<DiscardReason> {
        match self {
            Self::Value(_) => None,
            Self::Discarded(reason) => Some(*reason),
        }
    }
}

/// Everything one (agent, query term) stream has seen so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentTermHistory {
    agent_id: String,
    query_term: String,
    seen: HashSet<ItemKey>,
    last_round_index: Option<u64>,
    last_round_status: LastRoundStatus,
    collected_rounds: u64,
}

impl AgentTermHistory {
    pub fn new(agent_id: impl Into<String>, query_term: impl Into<String>) -> Self {
        Self {
            agent_id: agent_id.into(),
            query_term: query_term.into(),
            seen: HashSet::new(),
            last_round_index: None,
            last_round_status: LastRoundStatus::None,
            collected_rounds: 0,
        }
    }

    /// Empty history keyed to the stream `snapshot` belongs to.
    pub fn for_snapshot(snapshot: &RoundSnapshot) -> Self {
        Self::new(&snapshot.meta.agent_id, &snapshot.meta.query_term)
    }

    pub fn agent_id(&self) -> &str {
        &self.agent_id
    }

    pub fn query_term(&self) -> &str {
        &self.query_term
    }

    pub fn seen(&self) -> &HashSet<ItemKey> {
        &self.seen
    }

    pub fn has_seen(&self, key: &ItemKey) -> bool {
        self.seen.contains(key)
    }

    pub fn unique_count(&self) -> usize {
        self.seen.len()
    }

    pub fn last_round_index(&self) -> Option<u64> {
        self.last_round_index
    }

    pub fn last_round_status(&self) -> LastRoundStatus {
        self.last_round_status
    }

    /// Number of applied rounds that collected at least one item.
    pub fn collected_rounds(&self) -> u64 {
        self.collected_rounds
    }

    fn check_next(&self, snapshot: &RoundSnapshot) -> Result<(), MetricError> {
        if snapshot.meta.agent_id != self.agent_id || snapshot.meta.query_term != self.query_term {
            return Err(MetricError::StreamMismatch {
                expected: format!("{}/{}", self.agent_id, self.query_term),
                found: format!("{}/{}", snapshot.meta.agent_id, snapshot.meta.query_term),
            });
        }
        if let Some(last) = self.last_round_index {
            if snapshot.meta.round_index <= last {
                return Err(MetricError::OutOfOrder {
                    agent_id: self.agent_id.clone(),
                    query_term: self.query_term.clone(),
                    last,
                    got: snapshot.meta.round_index,
                });
            }
        }
        Ok(())
    }

    /// Adds every identity in `snapshot` to the seen-set and records its status.
    /// Discarded rounds still contribute their identities.
    pub fn apply_round(&mut self, snapshot: &RoundSnapshot) -> Result<(), MetricError> {
        self.check_next(snapshot)?;
        self.seen.extend(snapshot.items.iter().map(|item| item.key()));
        if !snapshot.is_missing() {
            self.collected_rounds += 1;
        }
        self.last_round_index = Some(snapshot.meta.round_index);
        self.last_round_status = snapshot.status.into();
        Ok(())
    }

    /// Scores `snapshot` and then applies it. Missing rounds yield `None`.
    pub fn observe(&mut self, snapshot: &RoundSnapshot) -> Result<Option<NoveltyResult>, MetricError> {
        let result = if snapshot.is_missing() {
            self.check_next(snapshot)?;
            None
        } else {
            Some(round_novelty(snapshot, self)?)
        };
        self.apply_round(snapshot)?;
        Ok(result)
    }
}

/// Flags, per item, whether its identity is new to the stream.
pub fn detect_new(snapshot: &RoundSnapshot, history: &AgentTermHistory) -> Result<Vec<bool>, MetricError> {
    history.check_next(snapshot)?;
    Ok(snapshot
        .items
        .iter()
        .map(|item| !history.has_seen(&item.key()))
        .collect())
}

/// Rank-weighted share of new items in `snapshot`, with weights rescaled over
/// the ranks that were collected. Rounds that cannot be classified are discarded.
pub fn round_novelty(snapshot: &RoundSnapshot, history: &AgentTermHistory) -> Result<NoveltyResult, MetricError> {
    if snapshot.is_missing() {
        return Err(MetricError::MissingSnapshot {
            round_index: snapshot.meta.round_index,
        });
    }
    let flags = detect_new(snapshot, history)?;

    if history.collected_rounds == 0 {
        return Ok(NoveltyResult::Discarded(DiscardReason::FirstRound));
    }
    match history.last_round_status {
        LastRoundStatus::Complete => {}
        LastRoundStatus::None => return Ok(NoveltyResult::Discarded(DiscardReason::FirstRound)),
        LastRoundStatus::Missing | LastRoundStatus::Incomplete => {
            return Ok(NoveltyResult::Discarded(DiscardReason::PriorRoundMissingOrIncomplete))
        }
    }

    let weights = RankWeights::new(snapshot.expected_count)?;
    let mut mass = 0.0;
    let mut new_mass = 0.0;
    for (item, is_new) in snapshot.items.iter().zip(flags) {
        let w = weights.get(item.rank)?;
        mass += w;
        if is_new {
            new_mass += w;
        }
    }
    Ok(NoveltyResult::Value(new_mass / mass))
}
