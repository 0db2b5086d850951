#![no_main]

use clubench::select::SelectorModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(model) = SelectorModel::from_json(data) {
        let z = vec![0.5; model.feature_manifest().len()];
        let _ = model.predict_values(&z);
    }
});
