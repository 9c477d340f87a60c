#![no_main]

use libfuzzer_sys::fuzz_target;
use serp_audit::ingest::{normalize_title, normalize_url};

fuzz_target!(|input: &str| {
    if let Ok(url) = normalize_url(input) {
        assert_eq!(normalize_url(&url).as_deref(), Ok(url.as_str()));
    }
    let title = normalize_title(input);
    assert_eq!(normalize_title(&title), title);
});
