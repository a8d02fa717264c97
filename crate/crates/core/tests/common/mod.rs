//! Shared generators and independent oracles for the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use tme_core::tree::{LinkKind, NodeId, TaskStatus, TaskTree};
use tme_core::Result;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Collapses every whitespace run to one space and trims the ends.
pub fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
pub enum Op {
    Add { parent: NodeId, input: bool },
    Status { id: NodeId, to: TaskStatus },
    Output { id: NodeId },
    Input { id: NodeId },
    Current { id: NodeId },
    Merge { survivor: NodeId, absorbed: NodeId },
    Link { from: NodeId, to: NodeId, kind: LinkKind },
    Rollback { id: NodeId },
    Prune,
}

const KINDS: [LinkKind; 3] = [LinkKind::DependsOn, LinkKind::ParallelWith, LinkKind::Replaces];

/// Draws an operation over the tree's ids plus one id that does not exist,
/// so some draws fail.
pub fn random_op<R: Rng>(rng: &mut R, tree: &TaskTree, max_nodes: usize) -> Op {
    let mut ids: Vec<NodeId> = tree.ids().collect();
    ids.push(NodeId::new(1000));
    let mut pick = || *ids.choose(rng).expect("non-empty");
    let a = pick();
    let b = pick();
    let choice = if tree.len() >= max_nodes {
        rng.gen_range(1..9)
    } else {
        rng.gen_range(0..9)
    };
    match choice {
        0 => Op::Add {
            parent: a,
            input: rng.gen_bool(0.7),
        },
        1 => Op::Status {
            id: a,
            to: *TaskStatus::ALL.choose(rng).expect("non-empty"),
        },
        2 => Op::Output { id: a },
        3 => Op::Input { id: a },
        4 => Op::Current { id: a },
        5 => Op::Merge {
            survivor: a,
            absorbed: b,
        },
        6 => Op::Link {
            from: a,
            to: b,
            kind: *KINDS.choose(rng).expect("non-empty"),
        },
        7 => Op::Rollback { id: a },
        _ => Op::Prune,
    }
}

pub fn apply_op(tree: &mut TaskTree, op: &Op) -> Result<()> {
    match *op {
        Op::Add { parent, input } => {
            let text = format!("step {}", tree.len());
            tree.add_child(parent, &text, input.then_some(text.as_str())).map(drop)
        }
        Op::Status { id, to } => tree.set_status(id, to),
        Op::Output { id } => tree.record_io(id, None, Some("reply")),
        Op::Input { id } => tree.record_io(id, Some("more input"), None),
        Op::Current { id } => tree.set_current(id),
        Op::Merge { survivor, absorbed } => tree.merge_nodes(survivor, absorbed),
        Op::Link { from, to, kind } => tree.add_dependency(from, to, kind),
        Op::Rollback { id } => tree.rollback_to(id),
        Op::Prune => {
            tree.prune();
            Ok(())
        }
    }
}

/// Builds a tree by applying random operations, ignoring failures.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize, ops: usize) -> TaskTree {
    let mut tree = TaskTree::new("root").expect("valid root");
    for _ in 0..ops {
        let op = random_op(rng, &tree, max_nodes);
        let _ = apply_op(&mut tree, &op);
    }
    tree
}

/// Structural invariants checked from the raw node table: a single root,
/// parent/child pointers agreeing both ways, every node reachable from the
/// root exactly once, and current reachable by parent pointers.
pub fn check_invariants(tree: &TaskTree) -> std::result::Result<(), String> {
    let root = tree.root();
    let root_node = tree.node(root).ok_or("root missing")?;
    if root_node.parent.is_some() {
        return Err("root has a parent".into());
    }
    for node in tree.nodes() {
        if node.id != root {
            let parent = node.parent.ok_or(format!("node {} has no parent", node.id))?;
            let p = tree.node(parent).ok_or(format!("node {} parent {parent} missing", node.id))?;
            if p.children.iter().filter(|c| **c == node.id).count() != 1 {
                return Err(format!("parent {parent} does not list child {} once", node.id));
            }
        }
        for child in &node.children {
            let c = tree.node(*child).ok_or(format!("child {child} missing"))?;
            if c.parent != Some(node.id) {
                return Err(format!("child {child} points elsewhere"));
            }
        }
        for dep in &node.dependencies {
            if !tree.contains(dep.to) {
                return Err(format!("node {} links to missing {}", node.id, dep.to));
            }
        }
    }
    let mut seen = HashSet::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            return Err(format!("node {id} reached twice"));
        }
        stack.extend(tree.node(id).expect("checked").children.iter().copied());
    }
    if seen.len() != tree.len() {
        return Err(format!("{} of {} nodes reachable", seen.len(), tree.len()));
    }
    if path_oracle(tree).is_none() {
        return Err("current not reachable from root".into());
    }
    tree.validate().map_err(|e| e.to_string())
}

/// Exhaustive search over all root-to-node paths for the one ending at
/// current.
pub fn path_oracle(tree: &TaskTree) -> Option<Vec<NodeId>> {
    fn walk(tree: &TaskTree, path: &mut Vec<NodeId>, found: &mut Vec<Vec<NodeId>>) {
        let id = *path.last().expect("non-empty");
        if id == tree.current() {
            found.push(path.clone());
        }
        for child in &tree.node(id).expect("exists").children {
            path.push(*child);
            walk(tree, path, found);
            path.pop();
        }
    }
    let mut found = Vec::new();
    walk(tree, &mut vec![tree.root()], &mut found);
    (found.len() == 1).then(|| found.pop().expect("one path"))
}

/// Iterative removal fixed point: start with every node outside the fixed
/// keep set removable, then repeatedly restore any removable node that a
/// surviving node still needs (as parent or `depends_on` target) until
/// nothing changes.
pub fn prune_oracle(tree: &TaskTree) -> Vec<NodeId> {
    let replaced: HashSet<NodeId> = tree
        .nodes()
        .flat_map(|n| n.dependencies.iter())
        .filter(|d| d.kind == LinkKind::Replaces)
        .map(|d| d.to)
        .collect();
    let path: HashSet<NodeId> = path_oracle(tree).expect("valid tree").into_iter().collect();
    let live_ancestor = |id: NodeId| {
        let mut stack = tree.node(id).expect("exists").children.clone();
        while let Some(c) = stack.pop() {
            let node = tree.node(c).expect("exists");
            if node.status != TaskStatus::Invalidated {
                return true;
            }
            stack.extend(node.children.iter().copied());
        }
        false
    };
    let mut removable: BTreeSet<NodeId> = tree
        .nodes()
        .filter(|n| n.status == TaskStatus::Invalidated || replaced.contains(&n.id))
        .map(|n| n.id)
        .filter(|id| !path.contains(id) && !live_ancestor(*id))
        .collect();
    loop {
        let needed: Vec<NodeId> = removable
            .iter()
            .copied()
            .filter(|id| {
                tree.nodes().any(|n| {
                    !removable.contains(&n.id)
                        && (n.parent == Some(*id)
                            || n.dependencies.iter().any(|d| d.kind == LinkKind::DependsOn && d.to == *id))
                })
            })
            .collect();
        if needed.is_empty() {
            return removable.into_iter().collect();
        }
        for id in needed {
            removable.remove(&id);
        }
    }
}
