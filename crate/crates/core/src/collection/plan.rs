//! Collection timetables.
//!
//! Every agent cycles through the terms of its category: a round starts every
//! `round_period`, and term `k` (0-based) fires `k * term_slot` after the round
//! start. All agents are synchronized on the same round grid.

use std::collections::BTreeMap;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Browser, Engine, Region};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("end_at {end} is before start_at {start}")]
    EndBeforeStart { start: DateTime<Utc>, end: DateTime<Utc> },
    #[error("round_period and term_slot must be positive")]
    NonPositiveDuration,
    #[error("category {category:?}: {terms} terms x {slot_minutes} min slot overflow the {period_minutes} min round")]
    TermOverflow {
        category: String,
        terms: usize,
        slot_minutes: i64,
        period_minutes: i64,
    },
    #[error("category {0:?} has no terms")]
    EmptyCategory(String),
    #[error("agent {agent:?} uses unknown category {category:?}")]
    UnknownCategory { agent: String, category: String },
    #[error("agent id {0:?} is used twice")]
    DuplicateAgent(String),
    #[error("stop time {stop} is not after the plan's last round at {last}")]
    StopBeforeEnd { stop: DateTime<Utc>, last: DateTime<Utc> },
}

fn default_round_period() -> i64 {
    21
}

fn default_term_slot() -> i64 {
    7
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    pub category: String,
}

/// Declarative plan configuration (TOML).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub start_at: DateTime<Utc>,
    pub end_at: DateTime<Utc>,
    #[serde(default = "default_round_period")]
    pub round_period_minutes: i64,
    #[serde(default = "default_term_slot")]
    pub term_slot_minutes: i64,
    /// Ordered terms per category.
    pub categories: BTreeMap<String, Vec<String>>,
    #[serde(default, rename = "agent")]
    pub agents: Vec<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionConfig>,
}

/// Continuation of a plan for a subset of categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionConfig {
    pub stop_at: DateTime<Utc>,
    /// Categories that keep collecting; empty means all.
    #[serde(default)]
    pub categories: Vec<String>,
}

impl PlanConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// One scheduled search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FireEvent {
    pub at: DateTime<Utc>,
    pub round_index: u64,
    pub term_index: usize,
    pub query_term: String,
    pub agent_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePlan {
    pub round_period: TimeDelta,
    pub term_slot: TimeDelta,
    pub start_at: DateTime<Utc>,
    pub end_at: DateTime<Utc>,
    pub categories: BTreeMap<String, Vec<String>>,
    pub agents: Vec<AgentSpec>,
    /// Index of this plan's first round on the overall collection grid.
    pub first_round_index: u64,
}

/// Validates `config` and fixes its round grid.
pub fn build_plan(config: &PlanConfig) -> Result<SchedulePlan, PlanError> {
    if config.round_period_minutes <= 0 || config.term_slot_minutes <= 0 {
        return Err(PlanError::NonPositiveDuration);
    }
    if config.end_at < config.start_at {
        return Err(PlanError::EndBeforeStart {
            start: config.start_at,
            end: config.end_at,
        });
    }
    for (category, terms) in &config.categories {
        if terms.is_empty() {
            return Err(PlanError::EmptyCategory(category.clone()));
        }
        if terms.len() as i64 * config.term_slot_minutes > config.round_period_minutes {
            return Err(PlanError::TermOverflow {
                category: category.clone(),
                terms: terms.len(),
                slot_minutes: config.term_slot_minutes,
                period_minutes: config.round_period_minutes,
            });
        }
    }
    for (i, agent) in config.agents.iter().enumerate() {
        if !config.categories.contains_key(&agent.category) {
            return Err(PlanError::UnknownCategory {
                agent: agent.id.clone(),
                category: agent.category.clone(),
            });
        }
        if config.agents[..i].iter().any(|a| a.id == agent.id) {
            return Err(PlanError::DuplicateAgent(agent.id.clone()));
        }
    }
    Ok(SchedulePlan {
        round_period: TimeDelta::minutes(config.round_period_minutes),
        term_slot: TimeDelta::minutes(config.term_slot_minutes),
        start_at: config.start_at,
        end_at: config.end_at,
        categories: config.categories.clone(),
        agents: config.agents.clone(),
        first_round_index: 0,
    })
}

/// Rounds added by continuing a plan, see [`SchedulePlan::extend_until`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub plan: SchedulePlan,
    pub additional_rounds: u64,
}

impl SchedulePlan {
    /// Rounds start at `start_at` and every `round_period` after it, up to and
    /// including `end_at`.
    pub fn round_count(&self) -> u64 {
        let span = (self.end_at - self.start_at).num_seconds();
        (span / self.round_period.num_seconds()) as u64 + 1
    }

    pub fn round_start(&self, local_round: u64) -> DateTime<Utc> {
        self.start_at + self.round_period * local_round as i32
    }

    pub fn last_round_start(&self) -> DateTime<Utc> {
        self.round_start(self.round_count() - 1)
    }

    pub fn terms_of(&self, agent: &AgentSpec) -> &[String] {
        self.categories.get(&agent.category).map_or(&[], Vec::as_slice)
    }

    /// Every (agent, term, round) with its fire time, ordered by time then
    /// agent position then term.
    pub fn timetable(&self) -> Vec<FireEvent> {
        let mut events = Vec::new();
        for local in 0..self.round_count() {
            let round_start = self.round_start(local);
            for (agent_index, agent) in self.agents.iter().enumerate() {
                for (term_index, term) in self.terms_of(agent).iter().enumerate() {
                    events.push(FireEvent {
                        at: round_start + self.term_slot * term_index as i32,
                        round_index: self.first_round_index + local,
                        term_index,
                        query_term: term.clone(),
                        agent_index,
                    });
                }
            }
        }
        events.sort_by(|a, b| (a.at, a.agent_index, a.term_index).cmp(&(b.at, b.agent_index, b.term_index)));
        events
    }

    /// Continues collecting on the same grid after this plan's last round,
    /// stopping at `stop_at`: a round due exactly at the stop instant is not
    /// fired. Only agents whose category is listed in `categories` continue
    /// (all agents when empty).
    pub fn extend_until(&self, stop_at: DateTime<Utc>, categories: &[String]) -> Result<Extension, PlanError> {
        let last = self.last_round_start();
        let first = last + self.round_period;
        if stop_at <= last {
            return Err(PlanError::StopBeforeEnd { stop: stop_at, last });
        }
        let additional = if stop_at <= first {
            0
        } else {
            let span = (stop_at - first).num_seconds();
            let period = self.round_period.num_seconds();
            // rounds at first, first + p, ... strictly before stop_at
            ((span - 1) / period + 1) as u64
        };
        let agents: Vec<AgentSpec> = self
            .agents
            .iter()
            .filter(|a| categories.is_empty() || categories.contains(&a.category))
            .cloned()
            .collect();
        let kept: BTreeMap<String, Vec<String>> = self
            .categories
            .iter()
            .filter(|(name, _)| categories.is_empty() || categories.contains(name))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let end_at = if additional == 0 {
            first
        } else {
            first + self.round_period * (additional - 1) as i32
        };
        Ok(Extension {
            plan: SchedulePlan {
                round_period: self.round_period,
                term_slot: self.term_slot,
                start_at: first,
                end_at,
                categories: kept,
                agents,
                first_round_index: self.first_round_index + self.round_count(),
            },
            additional_rounds: additional,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{FixedOffset, TimeZone};

    fn et(d: u32, h: u32, m: u32) -> DateTime<Utc> {
        // US Eastern was on standard time (UTC-5) throughout November 2020
        FixedOffset::west_opt(5 * 3600)
            .unwrap()
            .with_ymd_and_hms(2020, 11, d, h, m, 0)
            .unwrap()
            .with_timezone(&Utc)
    }

    fn config(start: DateTime<Utc>, end: DateTime<Utc>) -> PlanConfig {
        PlanConfig {
            start_at: start,
            end_at: end,
            round_period_minutes: 21,
            term_slot_minutes: 7,
            categories: BTreeMap::from([(
                "us".to_string(),
                vec!["joe biden".into(), "donald trump".into(), "us elections".into()],
            )]),
            agents: vec![AgentSpec {
                id: "a1".into(),
                engine: Engine::Google,
                region: Region::Oregon,
                browser: Browser::Chrome,
                category: "us".into(),
            }],
            extension: None,
        }
    }

    #[test]
    fn collection_a_has_80_rounds() {
        let plan = build_plan(&config(et(3, 7, 31), et(4, 11, 10))).unwrap();
        assert_eq!(plan.round_count(), 80);
    }

    #[test]
    fn collection_b_adds_329_rounds() {
        let plan = build_plan(&config(et(3, 7, 31), et(4, 11, 10))).unwrap();
        let ext = plan.extend_until(et(9, 6, 40), &["us".to_string()]).unwrap();
        assert_eq!(ext.additional_rounds, 329);
        assert_eq!(ext.plan.round_count(), 329);
        assert_eq!(ext.plan.first_round_index, 80);
    }

    #[test]
    fn single_round_single_term() {
        let mut cfg = config(et(3, 7, 31), et(3, 7, 31));
        cfg.categories.insert("us".into(), vec!["joe biden".into()]);
        let plan = build_plan(&cfg).unwrap();
        let table = plan.timetable();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].at, et(3, 7, 31));
    }

    #[test]
    fn terms_fire_on_slots() {
        let plan = build_plan(&config(et(3, 7, 31), et(3, 8, 0))).unwrap();
        let table = plan.timetable();
        assert_eq!(plan.round_count(), 2);
        assert_eq!(table.len(), 6);
        assert_eq!(table[1].at, et(3, 7, 38));
        assert_eq!(table[2].at, et(3, 7, 45));
        assert_eq!(table[3].at, et(3, 7, 52));
        assert_eq!(table[3].round_index, 1);
        assert_eq!(table, plan.timetable());
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(
            build_plan(&config(et(4, 0, 0), et(3, 0, 0))),
            Err(PlanError::EndBeforeStart { .. })
        ));
        let mut cfg = config(et(3, 0, 0), et(4, 0, 0));
        cfg.term_slot_minutes = 8;
        assert!(matches!(build_plan(&cfg), Err(PlanError::TermOverflow { .. })));
        let mut cfg = config(et(3, 0, 0), et(4, 0, 0));
        cfg.agents[0].category = "stable".into();
        assert!(matches!(build_plan(&cfg), Err(PlanError::UnknownCategory { .. })));
    }

    #[test]
    fn parses_toml() {
        let text = r#"
start_at = "2020-11-03T07:31:00-05:00"
end_at = "2020-11-04T11:10:00-05:00"

[categories]
us = ["joe biden", "donald trump", "us elections"]

[[agent]]
id = "a1"
engine = "bing"
region = "frankfurt"
browser = "firefox"
category = "us"

[extension]
stop_at = "2020-11-09T06:40:00-05:00"
categories = ["us"]
"#;
        let cfg = PlanConfig::from_toml(text).unwrap();
        assert_eq!(cfg.start_at, et(3, 7, 31));
        let plan = build_plan(&cfg).unwrap();
        assert_eq!(plan.round_count(), 80);
    }
}
