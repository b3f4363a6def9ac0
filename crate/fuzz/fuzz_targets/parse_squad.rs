#![no_main]

use advqa_core::corpus::{parse_squad, read_augmented, write_augmented, CheckMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_squad(data, CheckMode::Lenient);
    if let Ok(parsed) = parse_squad(data, CheckMode::Strict) {
        let bytes = write_augmented(&parsed.value).expect("parsed datasets serialize");
        let back = read_augmented(&bytes).expect("written datasets read back");
        assert_eq!(back.examples, parsed.value.examples);
    }
});
