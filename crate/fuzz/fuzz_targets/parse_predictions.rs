#![no_main]

use advqa_core::corpus::{parse_predictions, CheckMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let strict = parse_predictions(data, CheckMode::Strict);
    let lenient = parse_predictions(data, CheckMode::Lenient);
    if let (Ok(s), Ok(l)) = (strict, lenient) {
        assert_eq!(s.value.len(), l.value.len());
    }
});
