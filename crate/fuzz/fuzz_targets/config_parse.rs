#![no_main]
use libfuzzer_sys::fuzz_target;
use linsic::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let _ = cfg.validate();
        let again = ExperimentConfig::parse(&cfg.to_text()).expect("printed config parses");
        assert_eq!(again.to_text(), cfg.to_text());
    }
});
