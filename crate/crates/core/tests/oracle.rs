//! The incremental pipeline against two independent references: a
//! from-scratch rescan of every prior round, and the synthetic generator's
//! ground-truth ledger.

use std::collections::HashSet;

use chrono::{TimeDelta, TimeZone, Utc};
use proptest::prelude::*;
use serp_audit::collection::{generate_stream, StreamTemplate, SyntheticStreamConfig};
use serp_audit::metric::{detect_new, RankWeights};
use serp_audit::pipeline::score_stream;
use serp_audit::{
    AgentTermHistory, Browser, DiscardReason, Engine, NoveltyResult, Region, ResultItem, RoundSnapshot, RoundStatus,
    SnapshotMeta,
};

fn meta(round: u64) -> SnapshotMeta {
    SnapshotMeta {
        agent_id: "agent".into(),
        engine: Engine::Bing,
        region: Region::Frankfurt,
        browser: Browser::Firefox,
        category: Some("us".into()),
        query_term: "election".into(),
        round_index: round,
        captured_at: Utc.with_ymd_and_hms(2020, 11, 3, 12, 31, 0).unwrap() + TimeDelta::minutes(21 * round as i64),
    }
}

/// Recomputes every round's result by rescanning all earlier rounds.
fn brute_force(rounds: &[RoundSnapshot]) -> Vec<Option<NoveltyResult>> {
    let mut out = Vec::new();
    for (i, snap) in rounds.iter().enumerate() {
        if snap.is_missing() {
            out.push(None);
            continue;
        }
        let prior = &rounds[..i];
        if prior.iter().all(|s| s.is_missing()) {
            out.push(Some(NoveltyResult::Discarded(DiscardReason::FirstRound)));
            continue;
        }
        if prior.last().map(|s| s.status) != Some(RoundStatus::Complete) {
            out.push(Some(NoveltyResult::Discarded(
                DiscardReason::PriorRoundMissingOrIncomplete,
            )));
            continue;
        }
        let weights = RankWeights::new(snap.expected_count).unwrap();
        let mut mass = 0.0;
        let mut new_mass = 0.0;
        for item in &snap.items {
            let seen_before = prior
                .iter()
                .flat_map(|s| &s.items)
                .any(|p| p.url == item.url && p.title == item.title);
            let w = weights.get(item.rank).unwrap();
            mass += w;
            if !seen_before {
                new_mass += w;
            }
        }
        out.push(Some(NoveltyResult::Value(new_mass / mass)));
    }
    out
}

/// Rounds of up to `expected` ranks drawn from a small id space so that
/// repeats, gaps and status changes are all common.
fn arb_stream() -> impl Strategy<Value = Vec<RoundSnapshot>> {
    (1u32..8)
        .prop_flat_map(|expected| {
            let round = prop::collection::vec(prop::option::weighted(0.8, 0u32..12), expected as usize);
            (Just(expected), prop::collection::vec(round, 1..25))
        })
        .prop_map(|(expected, rounds)| {
            rounds
                .into_iter()
                .enumerate()
                .map(|(i, slots)| {
                    let items = slots
                        .iter()
                        .enumerate()
                        .filter_map(|(pos, id)| {
                            id.map(|id| {
                                // two titles per url: identity is the pair
                                ResultItem::new(
                                    pos as u32 + 1,
                                    format!("https://n.example/{}", id / 2),
                                    format!("t{}", id % 2),
                                )
                            })
                        })
                        .collect();
                    RoundSnapshot::from_items(meta(i as u64), expected, items).unwrap()
                })
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn incremental_matches_rescan(stream in arb_stream()) {
        let (results, _) = score_stream(&stream).unwrap();
        prop_assert_eq!(results, brute_force(&stream));
    }

    #[test]
    fn detect_new_is_pure(stream in arb_stream()) {
        let mut history = AgentTermHistory::for_snapshot(&stream[0]);
        for snap in &stream {
            let before = history.clone();
            let a = detect_new(snap, &history).unwrap();
            let b = detect_new(snap, &history).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&history, &before);
            history.apply_round(snap).unwrap();
        }
    }

    #[test]
    fn unique_count_matches_rescan(stream in arb_stream()) {
        let mut history = AgentTermHistory::for_snapshot(&stream[0]);
        let mut seen = HashSet::new();
        for snap in &stream {
            history.apply_round(snap).unwrap();
            seen.extend(snap.items.iter().map(|i| (i.url.clone(), i.title.clone())));
            prop_assert_eq!(history.unique_count(), seen.len());
        }
    }
}

#[test]
fn pipeline_matches_generator_ledger() {
    let mut seed = 0u64;
    for churn in [0.0, 0.1, 0.5, 1.0] {
        for drop in [0.0, 0.3] {
            for missing in [0.0, 0.1] {
                seed += 1;
                let rounds = 120;
                let config = SyntheticStreamConfig {
                    pool_size: 50 * (rounds as usize + 1),
                    churn_probability: churn,
                    list_size: 50,
                    drop_probability: drop,
                    missing_round_probability: missing,
                    seed,
                    rank_biased_churn: seed.is_multiple_of(2),
                };
                let (snaps, ledger) = generate_stream(&config, &StreamTemplate::default(), rounds).unwrap();
                let mut history = AgentTermHistory::for_snapshot(&snaps[0]);
                for (snap, truth) in snaps.iter().zip(&ledger.rounds) {
                    let got = history.observe(snap).unwrap();
                    assert_eq!(got, truth.expected, "seed {seed} round {}", truth.round_index);
                    assert_eq!(history.unique_count(), truth.observed_unique);
                    assert_eq!(snap.status, truth.status);
                }
            }
        }
    }
}

#[test]
fn identical_rounds_have_zero_novelty() {
    let items = || {
        (1..=50)
            .map(|r| ResultItem::new(r, format!("https://a.example/{r}"), "x"))
            .collect()
    };
    let stream = vec![
        RoundSnapshot::from_items(meta(0), 50, items()).unwrap(),
        RoundSnapshot::from_items(meta(1), 50, items()).unwrap(),
    ];
    let (results, _) = score_stream(&stream).unwrap();
    assert_eq!(
        results,
        vec![
            Some(NoveltyResult::Discarded(DiscardReason::FirstRound)),
            Some(NoveltyResult::Value(0.0))
        ]
    );
}
