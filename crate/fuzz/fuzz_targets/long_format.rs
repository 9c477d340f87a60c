#![no_main]

use libfuzzer_sys::fuzz_target;
use serp_audit::analysis::{export_long_format, import_long_format};

fuzz_target!(|data: &[u8]| {
    let Ok(observations) = import_long_format(data) else {
        return;
    };
    let mut out = Vec::new();
    export_long_format(&mut out, &observations).unwrap();
    let again = import_long_format(out.as_slice()).expect("exported file imports");
    assert_eq!(again.len(), observations.len());
});
