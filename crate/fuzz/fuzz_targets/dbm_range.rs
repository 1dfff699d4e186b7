#![no_main]
use libfuzzer_sys::fuzz_target;
use linsic::harness::{lists::MAX_SWEEP_POINTS, parse_dbm_range};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_dbm_range(text) {
            assert!(!v.is_empty());
            if text.contains("..") {
                assert!(v.len() <= MAX_SWEEP_POINTS);
            }
        }
    }
});
