#![no_main]

use advqa_core::corpus::{read_augmented, write_augmented};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ds) = read_augmented(data) {
        let once = write_augmented(&ds).expect("read datasets serialize");
        let back = read_augmented(&once).expect("written datasets read back");
        assert_eq!(back.examples, ds.examples);
        assert_eq!(write_augmented(&back).unwrap(), once);
    }
});
