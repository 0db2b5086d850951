#![no_main]

use clubench::metrics::Metric;
use clubench::perfmatrix::{read_matrix, write_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(pm) = read_matrix(data, Metric::Ari) {
        let mut out = Vec::new();
        write_matrix(&mut out, &pm).unwrap();
        assert_eq!(read_matrix(&out[..], Metric::Ari).unwrap(), pm);
    }
});
