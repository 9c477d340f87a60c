use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::synthetic::{generate_stream, GroundTruthLedger, StreamTemplate, SyntheticError, SyntheticStreamConfig};
use crate::metric::{Browser, Engine, Region, RoundSnapshot};

fn default_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap()
}

fn default_period() -> i64 {
    21
}

fn default_list_size() -> u32 {
    50
}

/// Parameters shared by all streams unless a stream overrides them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamDefaults {
    /// Defaults to enough items for full churn every round.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default)]
    pub churn_probability: f64,
    #[serde(default = "default_list_size")]
    pub list_size: u32,
    #[serde(default)]
    pub drop_probability: f64,
    #[serde(default)]
    pub missing_round_probability: f64,
    #[serde(default)]
    pub rank_biased_churn: bool,
}

impl Default for StreamDefaults {
    fn default() -> Self {
        Self {
            pool_size: None,
            churn_probability: 0.0,
            list_size: default_list_size(),
            drop_probability: 0.0,
            missing_round_probability: 0.0,
            rank_biased_churn: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    pub agent_id: String,
    pub engine: Engine,
    pub region: Region,
    pub browser: Browser,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub query_term: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub churn_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing_round_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
}

/// A multi-stream synthetic run (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
    #[serde(default = "default_start")]
    pub start_at: DateTime<Utc>,
    #[serde(default = "default_period")]
    pub round_period_minutes: i64,
    #[serde(default)]
    pub defaults: StreamDefaults,
    #[serde(rename = "stream")]
    pub streams: Vec<StreamSpec>,
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Per-stream generator config; stream `index` gets its own seed derived
    /// from the run seed.
    pub fn stream_config(&self, index: usize, seed: u64, rounds: u64) -> SyntheticStreamConfig {
        let spec = &self.streams[index];
        let d = &self.defaults;
        let list_size = d.list_size;
        SyntheticStreamConfig {
            pool_size: spec
                .pool_size
                .or(d.pool_size)
                .unwrap_or((rounds as usize + 1) * list_size as usize),
            churn_probability: spec.churn_probability.unwrap_or(d.churn_probability),
            list_size,
            drop_probability: spec.drop_probability.unwrap_or(d.drop_probability),
            missing_round_probability: spec.missing_round_probability.unwrap_or(d.missing_round_probability),
            seed: stream_seed(seed, index as u64),
            rank_biased_churn: d.rank_biased_churn,
        }
    }

    pub fn template(&self, index: usize) -> StreamTemplate {
        let spec = &self.streams[index];
        StreamTemplate {
            agent_id: spec.agent_id.clone(),
            engine: spec.engine.clone(),
            region: spec.region.clone(),
            browser: spec.browser.clone(),
            category: spec.category.clone(),
            query_term: spec.query_term.clone(),
            start_at: self.start_at,
            round_period_minutes: self.round_period_minutes,
        }
    }
}

/// splitmix64 over the run seed and stream index.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates every configured stream. Snapshots come out stream by stream,
/// each in round order.
pub fn simulate(
    config: &SimulationConfig,
    seed: u64,
    rounds: u64,
) -> Result<(Vec<RoundSnapshot>, GroundTruthLedger), SyntheticError> {
    let mut snapshots = Vec::new();
    let mut ledger = GroundTruthLedger::default();
    for index in 0..config.streams.len() {
        let (s, l) = generate_stream(
            &config.stream_config(index, seed, rounds),
            &config.template(index),
            rounds,
        )?;
        snapshots.extend(s);
        ledger.extend(l);
    }
    Ok((snapshots, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
seed = 3
rounds = 30

[defaults]
churn_probability = 0.1

[[stream]]
agent_id = "a1"
engine = "bing"
region = "oregon"
browser = "chrome"
query_term = "donald trump"
churn_probability = 0.3

[[stream]]
agent_id = "a1"
engine = "bing"
region = "oregon"
browser = "chrome"
query_term = "joe biden"
"#;

    #[test]
    fn overrides_and_seeds() {
        let cfg = SimulationConfig::from_toml(TEXT).unwrap();
        let a = cfg.stream_config(0, 3, 30);
        let b = cfg.stream_config(1, 3, 30);
        assert_eq!(a.churn_probability, 0.3);
        assert_eq!(b.churn_probability, 0.1);
        assert_ne!(a.seed, b.seed);
        assert_eq!(a.pool_size, 31 * 50);
        let (snaps, ledger) = simulate(&cfg, 3, 30).unwrap();
        assert_eq!(snaps.len(), 60);
        assert_eq!(ledger.rounds.len(), 60);
    }
}
