#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::trim::{Trim, TrimConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = TrimConfig::from_json(text) {
        let _ = Trim::from_config(&config);
    }
});
