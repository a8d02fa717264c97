#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::session::SessionScript;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(script) = SessionScript::parse(text) {
        assert!(!script.is_empty());
        assert_eq!(SessionScript::parse(&script.to_json()).expect("re-parses"), script);
    }
});
