#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::tree::TaskTree;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(tree) = TaskTree::from_json(text) {
        // Anything accepted must be valid and survive a round trip.
        tree.validate().expect("loaded trees are valid");
        let again = TaskTree::from_json(&tree.to_json()).expect("canonical form reloads");
        assert_eq!(again, tree);
    }
});
