#![no_main]

use libfuzzer_sys::fuzz_target;
use serp_audit::ingest::ProfileSet;

fuzz_target!(|text: &str| {
    let _ = ProfileSet::from_toml(text);
});
