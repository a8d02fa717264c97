#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::metrics::{render_table, TableFormat, TokenReport};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = TokenReport::from_csv(text) {
        let csv = render_table(&report, TableFormat::Csv);
        assert_eq!(TokenReport::from_csv(&csv).expect("re-parses"), report);
    }
});
