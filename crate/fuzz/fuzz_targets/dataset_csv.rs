#![no_main]

use clubench::data::{parse_csv, LabelSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_csv(data, "fuzz", LabelSpec::IfPresent("label"), None);
});
