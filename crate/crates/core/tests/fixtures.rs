//! Shipped engine profiles against frozen result pages.

use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use serde::Deserialize;
use serp_audit::ingest::{parse_serp, read_snapshots, write_snapshot, ProfileSet};
use serp_audit::{Browser, Engine, Region, RoundStatus, SnapshotMeta};

#[derive(Deserialize)]
struct Expected {
    engine: String,
    expected_count: u32,
    status: RoundStatus,
    items: Vec<ExpectedItem>,
    rejected_positions: Vec<u32>,
}

#[derive(Deserialize)]
struct ExpectedItem {
    rank: u32,
    url: String,
    title: String,
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/serp")
}

fn meta(engine: Engine) -> SnapshotMeta {
    SnapshotMeta {
        agent_id: format!("{engine}-oregon-1"),
        engine,
        region: Region::Oregon,
        browser: Browser::Chrome,
        category: Some("us".into()),
        query_term: "joe biden".into(),
        round_index: 3,
        captured_at: Utc.with_ymd_and_hms(2020, 11, 4, 1, 34, 0).unwrap(),
    }
}

#[test]
fn every_profile_matches_its_fixture() {
    let profiles = ProfileSet::load(&root().join("profiles/engines.toml")).unwrap();
    assert_eq!(profiles.len(), 5);
    for profile in profiles.iter() {
        let name = profile.engine.to_string();
        let html = std::fs::read_to_string(fixture_dir().join(format!("{name}.html"))).unwrap();
        let expected: Expected =
            serde_json::from_slice(&std::fs::read(fixture_dir().join(format!("{name}.expected.json"))).unwrap())
                .unwrap();
        assert_eq!(expected.engine, name);

        let parsed = parse_serp(&html, profile, meta(profile.engine.clone()), expected.expected_count).unwrap();
        let got: Vec<(u32, &str, &str)> = parsed
            .snapshot
            .items
            .iter()
            .map(|i| (i.rank, i.url.as_str(), i.title.as_str()))
            .collect();
        let want: Vec<(u32, &str, &str)> = expected
            .items
            .iter()
            .map(|i| (i.rank, i.url.as_str(), i.title.as_str()))
            .collect();
        assert_eq!(got, want, "{name}");
        assert_eq!(parsed.snapshot.status, expected.status, "{name}");
        let rejected: Vec<u32> = parsed.rejected.iter().map(|r| r.position).collect();
        assert_eq!(rejected, expected.rejected_positions, "{name}");

        let mut log = Vec::new();
        write_snapshot(&mut log, &parsed.snapshot).unwrap();
        let back = read_snapshots(log.as_slice()).unwrap();
        assert!(back.rejects.is_empty());
        assert_eq!(back.snapshots().collect::<Vec<_>>(), vec![&parsed.snapshot], "{name}");
    }
}

#[test]
fn fixtures_exist_for_every_profile_only() {
    let profiles = ProfileSet::load(&root().join("profiles/engines.toml")).unwrap();
    let mut pages: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.strip_suffix(".html").map(str::to_string)
        })
        .collect();
    pages.sort();
    let mut engines: Vec<String> = profiles.iter().map(|p| p.engine.to_string()).collect();
    engines.sort();
    assert_eq!(pages, engines);
}
