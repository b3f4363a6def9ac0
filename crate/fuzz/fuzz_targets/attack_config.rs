#![no_main]

use advqa_core::attacks::AttackConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = AttackConfig::from_toml(text) {
            cfg.validate().expect("loaded configs are valid");
        }
    }
});
