#![no_main]

use clubench::cluster::AlgorithmConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = AlgorithmConfig::parse_id(data) {
        assert_eq!(AlgorithmConfig::parse_id(&cfg.config_id()).unwrap(), cfg);
    }
});
