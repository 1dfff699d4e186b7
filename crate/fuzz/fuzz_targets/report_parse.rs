#![no_main]
use libfuzzer_sys::fuzz_target;
use linsic::harness::KeyValues;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kv) = KeyValues::parse(text) {
        assert_eq!(KeyValues::parse(&kv.to_text()).unwrap(), kv);
    }
});
