#![no_main]

use advqa_core::corpus::{load_dataset, CheckMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = load_dataset(data, CheckMode::Strict);
    let _ = load_dataset(data, CheckMode::Lenient);
});
