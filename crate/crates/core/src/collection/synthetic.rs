//! Synthetic snapshot streams with a ground-truth ledger.
//!
//! Round 0 is drawn fresh from a shuffled item pool. In every later round
//! each rank independently keeps its item or, with the churn probability,
//! takes an item the stream has never held. Because replaced items never
//! return, the ledger knows exactly which positions are first appearances.
//! Drops and missing rounds are applied afterwards, on the observation layer
//! only, and the ledger records what a correct pipeline must report for the
//! observed lists.

use std::collections::HashSet;

use chrono::{DateTime, TimeDelta, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{
    Browser, DiscardReason, Engine, NoveltyResult, RankWeights, Region, ResultItem, RoundSnapshot, RoundStatus,
    SnapshotMeta,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("{name} must be within [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("list_size must be at least 1")]
    EmptyList,
    #[error("list_size {list_size} exceeds pool_size {pool_size}")]
    PoolTooSmall { list_size: u32, pool_size: usize },
    #[error("item pool of {pool_size} exhausted at round {round}")]
    PoolExhausted { pool_size: usize, round: u64 },
    #[error("rounds must be at least 1")]
    NoRounds,
}

fn default_list_size() -> u32 {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticStreamConfig {
    pub pool_size: usize,
    pub churn_probability: f64,
    #[serde(default = "default_list_size")]
    pub list_size: u32,
    #[serde(default)]
    pub drop_probability: f64,
    #[serde(default)]
    pub missing_round_probability: f64,
    pub seed: u64,
    /// Concentrate churn on top ranks while keeping the mean rate unchanged.
    #[serde(default)]
    pub rank_biased_churn: bool,
}

impl SyntheticStreamConfig {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        for (name, value) in [
            ("churn_probability", self.churn_probability),
            ("drop_probability", self.drop_probability),
            ("missing_round_probability", self.missing_round_probability),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SyntheticError::Probability { name, value });
            }
        }
        if self.list_size == 0 {
            return Err(SyntheticError::EmptyList);
        }
        if (self.list_size as usize) > self.pool_size {
            return Err(SyntheticError::PoolTooSmall {
                list_size: self.list_size,
                pool_size: self.pool_size,
            });
        }
        Ok(())
    }

    fn churn_at(&self, rank: u32) -> f64 {
        if !self.rank_biased_churn {
            return self.churn_probability;
        }
        // linear in rank, mean over ranks equals churn_probability
        let n = f64::from(self.list_size);
        let tilt = 2.0 * (n - f64::from(rank) + 1.0) / (n + 1.0);
        (self.churn_probability * tilt).min(1.0)
    }
}

/// Coordinates stamped on every generated snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamTemplate {
    pub agent_id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub query_term: String,
    pub start_at: DateTime<Utc>,
    pub round_period_minutes: i64,
}

impl Default for StreamTemplate {
    fn default() -> Self {
        Self {
            agent_id: "synthetic-0".into(),
            engine: Engine::Other("synthetic".into()),
            region: Region::Other("synthetic".into()),
            browser: Browser::Other("synthetic".into()),
            category: None,
            query_term: "synthetic".into(),
            start_at: Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap(),
            round_period_minutes: 21,
        }
    }
}

impl StreamTemplate {
    /// Item identities are namespaced per (engine, region, term) so agents of
    /// the same condition draw from one shared universe.
    fn item_url(&self, id: usize) -> String {
        format!(
            "https://synthetic.example/{}/{}/{}/item/{id}",
            slug(self.engine.label()),
            slug(self.region.label()),
            slug(&self.query_term)
        )
    }

    fn meta(&self, round: u64) -> SnapshotMeta {
        SnapshotMeta {
            agent_id: self.agent_id.clone(),
            engine: self.engine.clone(),
            region: self.region.clone(),
            browser: self.browser.clone(),
            category: self.category.clone(),
            query_term: self.query_term.clone(),
            round_index: round,
            captured_at: self.start_at + TimeDelta::minutes(self.round_period_minutes) * round as i32,
        }
    }
}

pub(crate) fn slug(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Ground truth for one generated round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRound {
    pub agent_id: String,
    pub query_term: String,
    pub round_index: u64,
    /// Ranks holding an item that appears in the stream for the first time.
    pub new_ranks: Vec<u32>,
    /// Novelty of the full generated list; absent for round 0.
    pub true_novelty: Option<f64>,
    /// Distinct items placed in the list so far, observed or not.
    pub generated_unique: usize,
    pub status: RoundStatus,
    pub observed_ranks: Vec<u32>,
    /// What a correct pipeline reports for the observed list; absent when missing.
    pub expected: Option<NoveltyResult>,
    /// Distinct items observed so far.
    pub observed_unique: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruthLedger {
    pub rounds: Vec<LedgerRound>,
}

impl GroundTruthLedger {
    pub fn extend(&mut self, other: GroundTruthLedger) {
        self.rounds.extend(other.rounds);
    }
}

/// Generates one stream with default coordinates.
pub fn generate_synthetic(
    config: &SyntheticStreamConfig,
    rounds: u64,
) -> Result<(Vec<RoundSnapshot>, GroundTruthLedger), SyntheticError> {
    generate_stream(config, &StreamTemplate::default(), rounds)
}

pub fn generate_stream(
    config: &SyntheticStreamConfig,
    template: &StreamTemplate,
    rounds: u64,
) -> Result<(Vec<RoundSnapshot>, GroundTruthLedger), SyntheticError> {
    config.validate()?;
    if rounds == 0 {
        return Err(SyntheticError::NoRounds);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pool: Vec<usize> = (0..config.pool_size).collect();
    pool.shuffle(&mut rng);
    let mut fresh = pool.into_iter();

    let n = config.list_size;
    let weights = RankWeights::new(n).expect("list_size validated");
    let mut list: Vec<usize> = Vec::with_capacity(n as usize);
    let mut observed_ids: HashSet<usize> = HashSet::new();
    let mut generated_unique = 0usize;
    let mut prior_status: Option<RoundStatus> = None;
    let mut any_collected = false;

    let mut snapshots = Vec::with_capacity(rounds as usize);
    let mut ledger = GroundTruthLedger::default();

    for round in 0..rounds {
        let exhausted = || SyntheticError::PoolExhausted {
            pool_size: config.pool_size,
            round,
        };
        let mut new_ranks = Vec::new();
        if round == 0 {
            for rank in 1..=n {
                list.push(fresh.next().ok_or_else(exhausted)?);
                new_ranks.push(rank);
            }
        } else {
            for rank in 1..=n {
                if rng.random_bool(config.churn_at(rank)) {
                    list[rank as usize - 1] = fresh.next().ok_or_else(exhausted)?;
                    new_ranks.push(rank);
                }
            }
        }
        generated_unique += new_ranks.len();
        let true_novelty = (round > 0).then(|| {
            let all: Vec<u32> = (1..=n).collect();
            novelty_of(&weights, &all, &new_ranks)
        });

        let missing = rng.random_bool(config.missing_round_probability);
        let observed_ranks: Vec<u32> = if missing {
            Vec::new()
        } else {
            (1..=n).filter(|_| !rng.random_bool(config.drop_probability)).collect()
        };
        let status = RoundStatus::from_count(observed_ranks.len(), n);

        let expected = if status == RoundStatus::Missing {
            None
        } else if !any_collected {
            Some(NoveltyResult::Discarded(DiscardReason::FirstRound))
        } else if prior_status != Some(RoundStatus::Complete) {
            Some(NoveltyResult::Discarded(DiscardReason::PriorRoundMissingOrIncomplete))
        } else {
            Some(NoveltyResult::Value(novelty_of(&weights, &observed_ranks, &new_ranks)))
        };

        observed_ids.extend(observed_ranks.iter().map(|r| list[*r as usize - 1]));
        if status != RoundStatus::Missing {
            any_collected = true;
        }
        prior_status = Some(status);

        let items = observed_ranks
            .iter()
            .map(|r| {
                let id = list[*r as usize - 1];
                ResultItem::new(*r, template.item_url(id), format!("Synthetic item {id}"))
            })
            .collect();
        let snapshot =
            RoundSnapshot::from_items(template.meta(round), n, items).expect("generated items are unique and in range");
        debug_assert_eq!(snapshot.status, status);
        snapshots.push(snapshot);

        ledger.rounds.push(LedgerRound {
            agent_id: template.agent_id.clone(),
            query_term: template.query_term.clone(),
            round_index: round,
            new_ranks,
            true_novelty,
            generated_unique,
            status,
            observed_ranks,
            expected,
            observed_unique: observed_ids.len(),
        });
    }
    Ok((snapshots, ledger))
}

/// Share of rank weight held by `new_ranks` among `collected` ranks, summed
/// in rank order.
fn novelty_of(weights: &RankWeights, collected: &[u32], new_ranks: &[u32]) -> f64 {
    let mut mass = 0.0;
    let mut new_mass = 0.0;
    let mut new_iter = new_ranks.iter().peekable();
    for &rank in collected {
        while new_iter.next_if(|r| **r < rank).is_some() {}
        let w = weights.get(rank).expect("rank within list");
        mass += w;
        if new_iter.peek() == Some(&&rank) {
            new_mass += w;
        }
    }
    new_mass / mass
}
