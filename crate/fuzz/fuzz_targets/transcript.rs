#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::synth::PromptTranscript;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = PromptTranscript::parse(text) {
        let _ = t.render();
    }
    if let Ok(t) = PromptTranscript::from_json(text) {
        assert_eq!(PromptTranscript::from_json(&t.to_json()).expect("re-parses"), t);
    }
});
