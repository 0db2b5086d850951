#![no_main]

use clubench::data::{parse_csv, LabelSpec, Sidecar};
use libfuzzer_sys::fuzz_target;

// The sidecar supplies K for unlabeled files, so feed it through the parser too.
fuzz_target!(|data: &[u8]| {
    if let Ok(sidecar) = Sidecar::from_json(data) {
        let _ = parse_csv(&b"a,b\n1,2\n3,4\n5,6\n"[..], "fuzz", LabelSpec::None, Some(&sidecar));
    }
});
