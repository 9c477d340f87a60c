#![no_main]

use libfuzzer_sys::fuzz_target;
use serp_audit::ingest::{read_snapshots, write_snapshots};

// Whatever survives reading must survive a write/read round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(log) = read_snapshots(data) else {
        return;
    };
    let mut out = Vec::new();
    write_snapshots(&mut out, log.snapshots()).unwrap();
    let again = read_snapshots(out.as_slice()).expect("canonical log reads back");
    assert!(again.rejects.is_empty());
    assert_eq!(again.snapshots().count(), log.snapshots().count());
});
