use super::*;

const ASK: &str = "Help me fill out a form, I will provide some of my information to you.";
const NAME: &str = "My name is John Doe.";
const EMAIL: &str = "My email is john@example.com.";
const ADDRESS: &str = "My address is Market Street, San Francisco.";
const CORRECTION: &str = "Sorry, to correct, my name is John Smith.";

fn done_field(tree: &mut TaskTree, text: &str) -> NodeId {
    let id = tree.add_child(tree.root(), text, Some(text)).unwrap();
    tree.set_status(id, TaskStatus::Active).unwrap();
    tree.record_io(id, None, Some("Great, thank you!")).unwrap();
    tree.set_status(id, TaskStatus::Done).unwrap();
    tree.set_current(id).unwrap();
    id
}

fn form_tree(fields: &[&str]) -> (TaskTree, Vec<NodeId>) {
    let mut tree = TaskTree::new(ASK).unwrap();
    tree.record_io(tree.root(), Some(ASK), Some("Of course!")).unwrap();
    let ids = fields.iter().map(|f| done_field(&mut tree, f)).collect();
    (tree, ids)
}

#[test]
fn correction_merges_into_done_name_node() {
    let (tree, ids) = form_tree(&[NAME, EMAIL, ADDRESS]);
    let result = infer_structural_relationship(CORRECTION, &tree, Thresholds::default());
    assert_eq!(result.label, RelationshipLabel::Merge);
    assert_eq!(result.target, ids[0]);
}

#[test]
fn identical_text_scores_one() {
    let (mut tree, ids) = form_tree(&[NAME]);
    let r = infer_structural_relationship(NAME, &tree, Thresholds::default());
    assert_eq!((r.label, r.target), (RelationshipLabel::Replaces, ids[0]));
    assert!((r.score - 1.0).abs() < 1e-12);

    let open = tree.add_child(tree.root(), "Collect phone", None).unwrap();
    let r = infer_structural_relationship("Collect phone", &tree, Thresholds::default());
    assert_eq!((r.label, r.target), (RelationshipLabel::Merge, open));
    assert!((r.score - 1.0).abs() < 1e-12);
}

// Reference-embedder similarities against the name node (whose text is the
// sentence twice): email 3/√30 ≈ 0.548, address 2/√35 ≈ 0.338, root ask
// ≈ 0.217. All fall below moderate = 0.60.
#[test]
fn unrelated_field_becomes_new_subtask() {
    let (tree, ids) = form_tree(&[NAME]);
    let trim = Trim::default();
    let s = trim.similarity(EMAIL, &tree, ids[0]).unwrap();
    assert!((s - 3.0 / 30f64.sqrt()).abs() < 1e-12, "{s}");
    let r = trim.infer(EMAIL, &tree);
    assert_eq!(r.label, RelationshipLabel::ChildOf);
    assert_eq!(r.target, tree.root());
    assert!((r.score - s).abs() < 1e-12);
}

#[test]
fn moderate_similarity_is_a_dependency() {
    let (tree, ids) = form_tree(&[NAME]);
    // Same 0.548 score under a lower moderate threshold.
    let r = infer_structural_relationship(EMAIL, &tree, Thresholds::new(0.8, 0.5).unwrap());
    assert_eq!((r.label, r.target), (RelationshipLabel::DependsOn, ids[0]));
}

#[test]
fn cancellation_rolls_back_to_nearest_done_ancestor() {
    let mut tree = TaskTree::new(ASK).unwrap();
    let a = tree.add_child(tree.root(), "book flight", Some("book flight")).unwrap();
    tree.set_status(a, TaskStatus::Active).unwrap();
    tree.record_io(a, None, Some("booked")).unwrap();
    tree.set_status(a, TaskStatus::Done).unwrap();
    let b = tree.add_child(a, "book hotel", Some("book hotel")).unwrap();
    tree.set_current(b).unwrap();
    let r = Trim::default().infer("undo that please", &tree);
    assert_eq!((r.label, r.target), (RelationshipLabel::Rollback, a));

    let fresh = TaskTree::new("plan").unwrap();
    let r = Trim::default().infer("go back", &fresh);
    assert_eq!((r.label, r.target), (RelationshipLabel::Rollback, fresh.root()));
}

#[test]
fn correction_without_done_match_falls_through() {
    let mut tree = TaskTree::new(ASK).unwrap();
    tree.add_child(tree.root(), NAME, Some(NAME)).unwrap();
    // Best match is waiting, so the keyword rule does not fire.
    let r = Trim::default().infer(CORRECTION, &tree);
    assert_ne!(r.label, RelationshipLabel::Merge);
    assert_eq!(r.label, RelationshipLabel::DependsOn);
}

#[test]
fn keyword_rule_beats_similarity_band() {
    let (tree, ids) = form_tree(&[NAME]);
    // Identical to the done name node (score 1.0 → replaces by band) but
    // carrying a correction marker.
    let instruction = "Sorry my name is John Doe";
    let trim = Trim::default();
    assert!(trim.similarity(instruction, &tree, ids[0]).unwrap() >= trim.thresholds().high);
    let r = trim.infer(instruction, &tree);
    assert_eq!((r.label, r.target), (RelationshipLabel::Merge, ids[0]));
    assert!(r.rationale.contains("sorry"), "{}", r.rationale);
}

#[test]
fn ties_prefer_most_recent_round() {
    let mut tree = TaskTree::new("root").unwrap();
    let first = tree.add_child(tree.root(), "collect item", Some("collect item")).unwrap();
    let second = tree.add_child(tree.root(), "collect item", Some("collect item")).unwrap();
    let r = Trim::default().infer("collect item", &tree);
    assert_eq!(r.target, second);
    tree.record_io(first, Some("collect item"), None).unwrap();
    let r = Trim::default().infer("collect item", &tree);
    assert_eq!(r.target, first);
}

#[test]
fn invalidated_nodes_are_ignored() {
    let (mut tree, ids) = form_tree(&[NAME]);
    tree.set_status(ids[0], TaskStatus::Invalidated).unwrap();
    tree.set_current(tree.root()).unwrap();
    let r = Trim::default().infer(NAME, &tree);
    assert_ne!(r.target, ids[0]);
}

#[test]
fn inference_is_deterministic() {
    let (tree, _) = form_tree(&[NAME, EMAIL]);
    let first = Trim::default().infer(CORRECTION, &tree);
    for _ in 0..100 {
        assert_eq!(Trim::default().infer(CORRECTION, &tree), first);
    }
}

#[test]
fn apply_merge_keeps_node_count() {
    let (mut tree, ids) = form_tree(&[NAME, EMAIL, ADDRESS]);
    let before = tree.len();
    let r = infer_structural_relationship(CORRECTION, &tree, Thresholds::default());
    let carrier = apply(&mut tree, &r, CORRECTION).unwrap();
    assert_eq!(carrier, ids[0]);
    assert_eq!(tree.len(), before);
    assert_eq!(tree.current(), ids[0]);
    let texts: Vec<&str> = tree.get(ids[0]).unwrap().revisions.iter().map(|r| r.text.as_str()).collect();
    assert_eq!(texts, [NAME, CORRECTION]);
    tree.validate().unwrap();
}

#[test]
fn apply_child_of_adds_current_node() {
    let (mut tree, _) = form_tree(&[NAME]);
    let r = infer_structural_relationship(EMAIL, &tree, Thresholds::default());
    let before = tree.len();
    let carrier = apply(&mut tree, &r, EMAIL).unwrap();
    assert_eq!(tree.len(), before + 1);
    assert_eq!(tree.current(), carrier);
    let node = tree.get(carrier).unwrap();
    assert_eq!(node.status, TaskStatus::Active);
    assert_eq!(node.parent, Some(tree.root()));
    assert_eq!(node.revisions.len(), 1);
    tree.validate().unwrap();
}

/// Scripted five-node scenario checked against a hand-built expected tree:
/// root → {flight (done), hotel (done), car (done)}, then "book flight"
/// again replaces the flight node.
#[test]
fn apply_replaces_matches_hand_built_tree() {
    let mut tree = TaskTree::new("plan trip").unwrap();
    let mut ids = Vec::new();
    for step in ["book flight", "book hotel", "rent car"] {
        ids.push(done_field(&mut tree, step));
    }
    let r = Trim::default().infer("book flight", &tree);
    assert_eq!((r.label, r.target), (RelationshipLabel::Replaces, ids[0]));
    let carrier = apply(&mut tree, &r, "book flight").unwrap();
    assert_eq!(tree.len(), 5);

    let mut expected = TaskTree::new("plan trip").unwrap();
    let mut eids = Vec::new();
    for step in ["book flight", "book hotel", "rent car"] {
        eids.push(done_field(&mut expected, step));
    }
    expected.set_status(eids[0], TaskStatus::Invalidated).unwrap();
    let replacement = expected.add_child(expected.root(), "book flight", Some("book flight")).unwrap();
    expected.add_dependency(replacement, eids[0], LinkKind::Replaces).unwrap();
    expected.set_current(replacement).unwrap();
    expected.set_status(replacement, TaskStatus::Active).unwrap();

    assert_eq!(carrier, replacement);
    assert_eq!(tree, expected);
    // The replaced node is now prunable.
    assert_eq!(tree.prune(), vec![ids[0]]);
}

#[test]
fn apply_rollback_records_instruction_on_target() {
    let mut tree = TaskTree::new("plan").unwrap();
    let a = done_field(&mut tree, "book flight");
    let b = tree.add_child(a, "book hotel", Some("book hotel")).unwrap();
    tree.set_current(b).unwrap();
    let r = Trim::default().infer("cancel the hotel", &tree);
    apply(&mut tree, &r, "cancel the hotel").unwrap();
    assert_eq!(tree.current(), a);
    assert_eq!(tree.get(b).unwrap().status, TaskStatus::Invalidated);
    let node = tree.get(a).unwrap();
    assert_eq!(node.status, TaskStatus::Active);
    assert_eq!(node.revisions.last().unwrap().text, "cancel the hotel");
}

#[test]
fn apply_parallel_and_dependency_links() {
    let (mut tree, ids) = form_tree(&[NAME]);
    let parallel = InferenceResult {
        label: RelationshipLabel::ParallelWith,
        target: ids[0],
        score: 0.0,
        rationale: String::new(),
    };
    let p = apply(&mut tree, &parallel, "Collect phone").unwrap();
    assert_eq!(tree.get(p).unwrap().parent, Some(tree.root()));
    assert_eq!(tree.get(p).unwrap().dependencies, vec![crate::tree::Dependency { to: ids[0], kind: LinkKind::ParallelWith }]);

    let dep = InferenceResult { label: RelationshipLabel::DependsOn, ..parallel };
    let d = apply(&mut tree, &dep, "Confirm name").unwrap();
    // The parallel node is open, so the new node nests under it.
    assert_eq!(tree.get(d).unwrap().parent, Some(p));
    assert!(tree.get(d).unwrap().depends_on(ids[0]));
    tree.validate().unwrap();
}

#[test]
fn apply_failure_leaves_tree_unchanged() {
    let (mut tree, _) = form_tree(&[NAME]);
    let before = tree.clone();
    let bad = InferenceResult {
        label: RelationshipLabel::Replaces,
        target: tree.root(),
        score: 1.0,
        rationale: String::new(),
    };
    assert!(apply(&mut tree, &bad, "x").is_err());
    let missing = InferenceResult { target: NodeId::new(99), label: RelationshipLabel::ChildOf, ..bad };
    assert!(matches!(apply(&mut tree, &missing, "x"), Err(Error::NotFound(_))));
    assert_eq!(tree, before);
}

#[test]
fn thresholds_are_validated() {
    assert!(Thresholds::new(0.8, 0.6).is_ok());
    assert!(Thresholds::new(1.0, 0.99).is_ok());
    for (h, m) in [(0.6, 0.8), (0.5, 0.5), (1.1, 0.5), (0.5, 0.0)] {
        assert!(Thresholds::new(h, m).is_err(), "{h} {m}");
    }
}
