#![no_main]

use advqa_core::report::{emit_report, Format};
use advqa_core::taxonomy::TaxonomyReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<TaxonomyReport>(data) {
        for format in [Format::Json, Format::Csv, Format::Markdown] {
            let _ = emit_report(&report, format);
        }
    }
});
