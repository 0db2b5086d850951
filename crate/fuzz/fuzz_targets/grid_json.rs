#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = clubench::sweep::parse_grids_json(data);
});
