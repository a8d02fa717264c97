#![no_main]

use libfuzzer_sys::fuzz_target;
use tme_core::planner::{populate, Decomposer, Goal, TemplateDecomposer};
use tme_core::tree::TaskTree;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(decomposer) = TemplateDecomposer::from_json(text) else {
        return;
    };
    for template in decomposer.templates() {
        let goal = Goal::new(template.match_keywords.join(" ")).unwrap_or_else(|_| Goal::new("goal").unwrap());
        let outline = decomposer.decompose(&goal).expect("decompose is infallible");
        let mut tree = TaskTree::new("root").unwrap();
        if populate(&mut tree, &outline).is_ok() {
            tree.validate().expect("populated tree is valid");
        }
    }
});
