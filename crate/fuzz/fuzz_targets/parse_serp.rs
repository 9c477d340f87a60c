#![no_main]

use std::sync::OnceLock;

use chrono::DateTime;
use libfuzzer_sys::fuzz_target;
use serp_audit::ingest::{parse_serp, ProfileSet};
use serp_audit::{Browser, Region, SnapshotMeta};

const PROFILES: &str = include_str!("../../profiles/engines.toml");

fn profiles() -> &'static ProfileSet {
    static SET: OnceLock<ProfileSet> = OnceLock::new();
    SET.get_or_init(|| ProfileSet::from_toml(PROFILES).expect("shipped profiles load"))
}

// First byte picks the profile, the rest is the page.
fuzz_target!(|data: &[u8]| {
    let Some((pick, page)) = data.split_first() else {
        return;
    };
    let set = profiles();
    let profile = set.iter().nth(*pick as usize % set.len()).unwrap();
    let html = String::from_utf8_lossy(page);
    let meta = SnapshotMeta {
        agent_id: "fuzz".into(),
        engine: profile.engine.clone(),
        region: Region::Oregon,
        browser: Browser::Chrome,
        category: None,
        query_term: "fuzz".into(),
        round_index: 0,
        captured_at: DateTime::UNIX_EPOCH,
    };
    if let Ok(page) = parse_serp(&html, profile, meta, 10) {
        let items = &page.snapshot.items;
        assert!(items.len() <= 10);
        assert!(items.windows(2).all(|w| w[0].rank < w[1].rank));
    }
});
