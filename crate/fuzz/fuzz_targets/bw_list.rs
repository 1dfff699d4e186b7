#![no_main]
use libfuzzer_sys::fuzz_target;
use linsic::harness::parse_bw_list;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_bw_list(text) {
            assert!(v.iter().all(|b| b.is_finite() && *b > 0.0));
        }
    }
});
