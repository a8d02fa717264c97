//! Task Memory Tree: hierarchical task state for multi-step sessions.
//!
//! Every node is one task step. Nodes carry an action label, the latest
//! input/output, an execution status, parent/children links, cross-branch
//! dependency links and an ordered revision history. The tree exposes the
//! structural mutations used by relationship inference: child insertion,
//! status transitions, merge, prune and rollback.
//!
//! All mutating operations validate first and only then touch state, so a
//! call that returns an error leaves the tree unchanged.

mod render;
mod schema;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use render::{render_outline, OutlineStyle};
pub use schema::SCHEMA_VERSION;

/// Identifier of a node. Assigned monotonically within a tree and rendered
/// as a decimal string in documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u64);

impl NodeId {
    pub const fn new(raw: u64) -> Self {
        NodeId(raw)
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidArgument(format!("invalid node id `{s}`"));
        // Only canonical decimal: no sign, no leading zeros.
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
            return Err(invalid());
        }
        s.parse().map(NodeId).map_err(|_| invalid())
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Execution state of a task step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Waiting,
    Active,
    Done,
    Failed,
    Invalidated,
}

impl TaskStatus {
    pub const ALL: [TaskStatus; 5] = [
        TaskStatus::Waiting,
        TaskStatus::Active,
        TaskStatus::Done,
        TaskStatus::Failed,
        TaskStatus::Invalidated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskStatus::Waiting => "waiting",
            TaskStatus::Active => "active",
            TaskStatus::Done => "done",
            TaskStatus::Failed => "failed",
            TaskStatus::Invalidated => "invalidated",
        }
    }

    /// Transition table: waiting→active, active→{done, failed}, and any
    /// non-terminal status → invalidated.
    pub fn can_transition_to(self, to: TaskStatus) -> bool {
        use TaskStatus::*;
        matches!(
            (self, to),
            (Waiting, Active)
                | (Active, Done)
                | (Active, Failed)
                | (Waiting | Active | Done | Failed, Invalidated)
        )
    }

    /// Waiting or active: the step can still take work.
    pub fn is_open(self) -> bool {
        matches!(self, TaskStatus::Waiting | TaskStatus::Active)
    }
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskStatus::ALL
            .into_iter()
            .find(|status| status.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown status `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionKind {
    Initial,
    Correction,
}

impl RevisionKind {
    pub fn label(self) -> &'static str {
        match self {
            RevisionKind::Initial => "Initial",
            RevisionKind::Correction => "Correction",
        }
    }
}

/// One user-supplied value for a node, stamped with the logical round in
/// which it arrived. `reply` is the assistant output recorded while this
/// revision was the node's latest one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevisionEntry {
    pub round: u64,
    pub kind: RevisionKind,
    pub text: String,
    pub reply: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    DependsOn,
    ParallelWith,
    Replaces,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::DependsOn => "depends_on",
            LinkKind::ParallelWith => "parallel_with",
            LinkKind::Replaces => "replaces",
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outbound cross-link as stored on its source node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dependency {
    pub to: NodeId,
    pub kind: LinkKind,
}

/// A cross-link with both endpoints spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DependencyLink {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskNode {
    pub id: NodeId,
    pub action: String,
    pub input: Option<String>,
    pub output: Option<String>,
    pub status: TaskStatus,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub dependencies: Vec<Dependency>,
    pub revisions: Vec<RevisionEntry>,
    pub retry_count: u32,
    pub error: Option<String>,
}

impl TaskNode {
    fn new(id: NodeId, action: String, parent: Option<NodeId>, status: TaskStatus) -> Self {
        TaskNode {
            id,
            action,
            input: None,
            output: None,
            status,
            parent,
            children: Vec::new(),
            dependencies: Vec::new(),
            revisions: Vec::new(),
            retry_count: 0,
            error: None,
        }
    }

    pub fn latest_revision(&self) -> Option<&RevisionEntry> {
        self.revisions.last()
    }

    /// Round of the most recent revision, if any.
    pub fn last_round(&self) -> Option<u64> {
        self.revisions.last().map(|r| r.round)
    }

    /// Text used for similarity: the action plus the latest revision.
    pub fn similarity_text(&self) -> String {
        match self.latest_revision() {
            Some(rev) => format!("{} {}", self.action, rev.text),
            None => self.action.clone(),
        }
    }

    pub fn depends_on(&self, target: NodeId) -> bool {
        self.dependencies
            .iter()
            .any(|d| d.to == target && d.kind == LinkKind::DependsOn)
    }
}

/// The task tree. A single-writer value: mutate through one owner, share
/// immutable clones or serialized snapshots for concurrent reads.
#[derive(Debug, Clone)]
pub struct TaskTree {
    root: NodeId,
    current: NodeId,
    nodes: BTreeMap<NodeId, TaskNode>,
    next_round: u64,
    next_id: u64,
}

/// Structural equality. The id allocator is not part of the document and is
/// excluded.
impl PartialEq for TaskTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.current == other.current
            && self.next_round == other.next_round
            && self.nodes == other.nodes
    }
}

impl Eq for TaskTree {}

fn non_empty(what: &str, text: &str) -> Result<()> {
    if text.trim().is_empty() {
        Err(Error::InvalidArgument(format!("{what} must not be empty")))
    } else {
        Ok(())
    }
}

impl TaskTree {
    /// Creates a tree holding a single active root.
    pub fn new(root_action: &str) -> Result<Self> {
        non_empty("root action", root_action)?;
        let root = NodeId(0);
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            TaskNode::new(root, root_action.to_string(), None, TaskStatus::Active),
        );
        Ok(TaskTree {
            root,
            current: root,
            nodes,
            next_round: 0,
            next_id: 1,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn current(&self) -> NodeId {
        self.current
    }

    pub fn next_round(&self) -> u64 {
        self.next_round
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&TaskNode> {
        self.nodes.get(&id)
    }

    pub fn get(&self, id: NodeId) -> Result<&TaskNode> {
        self.nodes.get(&id).ok_or_else(|| Error::node_not_found(id))
    }

    fn get_mut(&mut self, id: NodeId) -> Result<&mut TaskNode> {
        self.nodes
            .get_mut(&id)
            .ok_or_else(|| Error::node_not_found(id))
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &TaskNode> {
        self.nodes.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// Every cross-link in the tree, ordered by source id then insertion.
    pub fn links(&self) -> Vec<DependencyLink> {
        self.nodes
            .values()
            .flat_map(|node| {
                node.dependencies.iter().map(move |d| DependencyLink {
                    from: node.id,
                    to: d.to,
                    kind: d.kind,
                })
            })
            .collect()
    }

    fn take_round(&mut self) -> u64 {
        let round = self.next_round;
        self.next_round += 1;
        round
    }

    fn ensure_mutable(&self, id: NodeId) -> Result<&TaskNode> {
        let node = self.get(id)?;
        if node.status == TaskStatus::Invalidated {
            return Err(Error::IllegalState {
                id,
                status: node.status,
            });
        }
        Ok(node)
    }

    /// Appends a waiting child as the last child of `parent`. An `input`
    /// seeds the revision history with an initial entry.
    pub fn add_child(&mut self, parent: NodeId, action: &str, input: Option<&str>) -> Result<NodeId> {
        self.ensure_mutable(parent)?;
        non_empty("action", action)?;
        if let Some(text) = input {
            non_empty("input", text)?;
        }

        let id = NodeId(self.next_id);
        self.next_id += 1;
        let mut node = TaskNode::new(id, action.to_string(), Some(parent), TaskStatus::Waiting);
        if let Some(text) = input {
            let round = self.take_round();
            node.input = Some(text.to_string());
            node.revisions.push(RevisionEntry {
                round,
                kind: RevisionKind::Initial,
                text: text.to_string(),
                reply: None,
            });
        }
        self.nodes.insert(id, node);
        self.get_mut(parent)?.children.push(id);
        Ok(id)
    }

    pub fn set_status(&mut self, id: NodeId, status: TaskStatus) -> Result<()> {
        let node = self.get(id)?;
        if !node.status.can_transition_to(status) {
            return Err(Error::IllegalTransition {
                from: node.status,
                to: status,
            });
        }
        if status == TaskStatus::Done && node.output.is_none() {
            return Err(Error::InvalidArgument(format!(
                "node {id} cannot be done without an output"
            )));
        }
        self.get_mut(id)?.status = status;
        Ok(())
    }

    /// Records user input and/or assistant output on a node. Input appends a
    /// revision (initial for the first, correction afterwards); output
    /// overwrites the node output and is attached to the latest revision.
    pub fn record_io(&mut self, id: NodeId, input: Option<&str>, output: Option<&str>) -> Result<()> {
        self.ensure_mutable(id)?;
        if let Some(text) = input {
            non_empty("input", text)?;
        }
        if let Some(text) = output {
            non_empty("output", text)?;
        }

        let round = input.map(|_| self.take_round());
        let node = self.get_mut(id)?;
        if let (Some(text), Some(round)) = (input, round) {
            let kind = if node.revisions.is_empty() {
                RevisionKind::Initial
            } else {
                RevisionKind::Correction
            };
            node.revisions.push(RevisionEntry {
                round,
                kind,
                text: text.to_string(),
                reply: None,
            });
            node.input = Some(text.to_string());
        }
        if let Some(text) = output {
            node.output = Some(text.to_string());
            if let Some(rev) = node.revisions.last_mut() {
                rev.reply = Some(text.to_string());
            }
        }
        Ok(())
    }

    pub fn record_error(&mut self, id: NodeId, error: &str) -> Result<()> {
        self.ensure_mutable(id)?;
        self.get_mut(id)?.error = Some(error.to_string());
        Ok(())
    }

    /// Moves the current pointer. The target must not be invalidated.
    pub fn set_current(&mut self, id: NodeId) -> Result<()> {
        self.ensure_mutable(id)?;
        self.current = id;
        Ok(())
    }

    /// Ancestors of `id` from its parent up to the root.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cursor = self.nodes.get(&id).and_then(|n| n.parent);
        while let Some(p) = cursor {
            out.push(p);
            cursor = self.nodes.get(&p).and_then(|n| n.parent);
        }
        out
    }

    /// True when `ancestor` is a strict ancestor of `id`.
    pub fn is_ancestor(&self, ancestor: NodeId, id: NodeId) -> bool {
        self.ancestors(id).contains(&ancestor)
    }

    /// Strict descendants of `id` in pre-order, children in insertion order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = match self.nodes.get(&id) {
            Some(node) => node.children.iter().rev().copied().collect(),
            None => return out,
        };
        while let Some(next) = stack.pop() {
            out.push(next);
            if let Some(node) = self.nodes.get(&next) {
                stack.extend(node.children.iter().rev().copied());
            }
        }
        out
    }

    /// All nodes in pre-order starting at the root.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = vec![self.root];
        out.extend(self.descendants(self.root));
        out
    }

    /// Root-to-current path.
    pub fn active_path(&self) -> Vec<NodeId> {
        let mut path = self.ancestors(self.current);
        path.reverse();
        path.push(self.current);
        path
    }

    /// Nearest waiting/active node at or above `current`, falling back to
    /// the root.
    pub fn open_anchor(&self) -> NodeId {
        self.active_path()
            .into_iter()
            .rev()
            .find(|id| self.nodes[id].status.is_open())
            .unwrap_or(self.root)
    }

    /// Absorbs `absorbed` into `survivor`.
    ///
    /// The survivor keeps its id, position and action. Revision histories are
    /// merged in round order with the first entry labelled initial and the
    /// rest corrections. The absorbed node's children are appended to the
    /// survivor and every link touching it is re-targeted to the survivor.
    pub fn merge_nodes(&mut self, survivor: NodeId, absorbed: NodeId) -> Result<()> {
        if survivor == absorbed {
            return Err(Error::IllegalMerge(format!("cannot merge node {survivor} into itself")));
        }
        self.ensure_mutable(survivor)?;
        self.get(absorbed)?;
        if self.is_ancestor(absorbed, survivor) {
            return Err(Error::IllegalMerge(format!(
                "node {absorbed} is an ancestor of {survivor}"
            )));
        }

        let gone = self.nodes.remove(&absorbed).expect("checked above");
        if let Some(parent) = gone.parent {
            if let Some(p) = self.nodes.get_mut(&parent) {
                p.children.retain(|c| *c != absorbed);
            }
        }
        for child in &gone.children {
            if let Some(c) = self.nodes.get_mut(child) {
                c.parent = Some(survivor);
            }
        }

        // Re-target inbound links.
        for node in self.nodes.values_mut() {
            let owner = node.id;
            for dep in node.dependencies.iter_mut() {
                if dep.to == absorbed {
                    dep.to = survivor;
                }
            }
            if owner == survivor {
                continue;
            }
            dedup_links(&mut node.dependencies, owner);
        }

        let target = self.nodes.get_mut(&survivor).expect("checked above");
        target.children.extend(gone.children.iter().copied());

        let mut revisions = std::mem::take(&mut target.revisions);
        revisions.extend(gone.revisions);
        revisions.sort_by_key(|r| r.round);
        for (i, rev) in revisions.iter_mut().enumerate() {
            rev.kind = if i == 0 {
                RevisionKind::Initial
            } else {
                RevisionKind::Correction
            };
        }
        target.revisions = revisions;
        if let Some(latest) = target.revisions.last() {
            target.input = Some(latest.text.clone());
            if let Some(reply) = &latest.reply {
                target.output = Some(reply.clone());
            }
        }
        if target.output.is_none() {
            target.output = gone.output;
        }
        if target.error.is_none() {
            target.error = gone.error;
        }
        target.retry_count += gone.retry_count;
        target.dependencies.extend(gone.dependencies);
        dedup_links(&mut target.dependencies, survivor);

        if self.current == absorbed {
            self.current = survivor;
        }
        Ok(())
    }

    /// Adds a cross-link stored on `from`.
    pub fn add_dependency(&mut self, from: NodeId, to: NodeId, kind: LinkKind) -> Result<()> {
        if from == to {
            return Err(Error::InvalidArgument(format!("self-link on node {from}")));
        }
        self.get(to)?;
        let source = self.get(from)?;
        if source.dependencies.iter().any(|d| d.to == to && d.kind == kind) {
            return Err(Error::DuplicateLink {
                from,
                to,
                kind: kind.to_string(),
            });
        }
        self.get_mut(from)?.dependencies.push(Dependency { to, kind });
        Ok(())
    }

    /// Reverts the current pointer to `id`, which must lie on the active
    /// path. Everything below `id` along the abandoned path segment is
    /// invalidated; a done or failed target is reopened as active and its
    /// retry counter incremented.
    pub fn rollback_to(&mut self, id: NodeId) -> Result<()> {
        let path = self.active_path();
        let Some(pos) = path.iter().position(|p| *p == id) else {
            return if self.contains(id) {
                Err(Error::IllegalRollback(id))
            } else {
                Err(Error::node_not_found(id))
            };
        };

        if let Some(&branch) = path.get(pos + 1) {
            let mut doomed = vec![branch];
            doomed.extend(self.descendants(branch));
            for d in doomed {
                let node = self.nodes.get_mut(&d).expect("descendant exists");
                node.status = TaskStatus::Invalidated;
            }
        }

        let node = self.nodes.get_mut(&id).expect("on active path");
        if matches!(node.status, TaskStatus::Done | TaskStatus::Failed) {
            node.status = TaskStatus::Active;
            node.retry_count += 1;
        }
        self.current = id;
        Ok(())
    }

    /// Removes invalidated or replaced nodes that nothing still needs and
    /// returns their ids in ascending order.
    ///
    /// A candidate (invalidated, or the target of a `replaces` link) is kept
    /// when it is on the active path, is an ancestor of a non-invalidated
    /// node, or is needed by a kept node: as its ancestor or as a
    /// `depends_on` target. The kept set is the least fixed point of those
    /// rules; everything else goes.
    pub fn prune(&mut self) -> Vec<NodeId> {
        let replaced: HashSet<NodeId> = self
            .links()
            .into_iter()
            .filter(|l| l.kind == LinkKind::Replaces)
            .map(|l| l.to)
            .collect();

        let mut kept: BTreeSet<NodeId> = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        for node in self.nodes.values() {
            let candidate = node.status == TaskStatus::Invalidated || replaced.contains(&node.id);
            if !candidate {
                queue.push_back(node.id);
            }
            if node.status != TaskStatus::Invalidated {
                queue.extend(self.ancestors(node.id));
            }
        }
        queue.extend(self.active_path());

        while let Some(id) = queue.pop_front() {
            if !kept.insert(id) {
                continue;
            }
            let node = &self.nodes[&id];
            if let Some(parent) = node.parent {
                queue.push_back(parent);
            }
            for dep in &node.dependencies {
                if dep.kind == LinkKind::DependsOn {
                    queue.push_back(dep.to);
                }
            }
        }

        let removed: Vec<NodeId> = self
            .nodes
            .keys()
            .filter(|id| !kept.contains(id))
            .copied()
            .collect();
        if removed.is_empty() {
            return removed;
        }
        for id in &removed {
            self.nodes.remove(id);
        }
        for node in self.nodes.values_mut() {
            node.children.retain(|c| kept.contains(c));
            node.dependencies.retain(|d| kept.contains(&d.to));
        }
        removed
    }

    /// Checks every structural invariant. Errors carry a document path to
    /// the offending field.
    pub fn validate(&self) -> Result<()> {
        if !self.nodes.contains_key(&self.root) {
            return Err(Error::schema("root", format!("unknown node {}", self.root)));
        }
        if !self.nodes.contains_key(&self.current) {
            return Err(Error::schema("current", format!("unknown node {}", self.current)));
        }

        for (key, node) in &self.nodes {
            let at = |field: &str| format!("nodes.{key}.{field}");
            if node.id != *key {
                return Err(Error::schema(at("id"), format!("id {} does not match key", node.id)));
            }
            if node.action.trim().is_empty() {
                return Err(Error::schema(at("action"), "action must not be empty"));
            }
            match node.parent {
                None if *key != self.root => {
                    return Err(Error::schema(at("parent"), "only the root may have no parent"));
                }
                Some(_) if *key == self.root => {
                    return Err(Error::schema(at("parent"), "root must not have a parent"));
                }
                Some(p) => match self.nodes.get(&p) {
                    None => return Err(Error::schema(at("parent"), format!("dangling id {p}"))),
                    Some(parent) if !parent.children.contains(key) => {
                        return Err(Error::schema(
                            at("parent"),
                            format!("node {p} does not list {key} as a child"),
                        ));
                    }
                    _ => {}
                },
                None => {}
            }

            let mut seen = HashSet::new();
            for (i, child) in node.children.iter().enumerate() {
                let path = format!("nodes.{key}.children[{i}]");
                match self.nodes.get(child) {
                    None => return Err(Error::schema(path, format!("dangling id {child}"))),
                    Some(c) if c.parent != Some(*key) => {
                        return Err(Error::schema(path, format!("node {child} has a different parent")));
                    }
                    _ => {}
                }
                if !seen.insert(*child) {
                    return Err(Error::schema(path, format!("duplicate child {child}")));
                }
            }

            let mut links = HashSet::new();
            for (i, dep) in node.dependencies.iter().enumerate() {
                let path = format!("nodes.{key}.dependencies[{i}].to");
                if !self.nodes.contains_key(&dep.to) {
                    return Err(Error::schema(path, format!("dangling id {}", dep.to)));
                }
                if dep.to == *key {
                    return Err(Error::schema(path, "self-link"));
                }
                if !links.insert((dep.to, dep.kind)) {
                    return Err(Error::schema(path, "duplicate link"));
                }
            }

            let mut last_round = None;
            for (i, rev) in node.revisions.iter().enumerate() {
                let path = |field: &str| format!("nodes.{key}.revisions[{i}].{field}");
                if rev.round >= self.next_round {
                    return Err(Error::schema(path("round"), "round is not below next_round"));
                }
                if last_round.is_some_and(|prev| rev.round <= prev) {
                    return Err(Error::schema(path("round"), "revisions out of round order"));
                }
                last_round = Some(rev.round);
                let expected = if i == 0 {
                    RevisionKind::Initial
                } else {
                    RevisionKind::Correction
                };
                if rev.kind != expected {
                    return Err(Error::schema(
                        path("kind"),
                        "first revision must be initial and later ones corrections",
                    ));
                }
            }

            if node.status == TaskStatus::Done && node.output.is_none() {
                return Err(Error::schema(at("output"), "done node without output"));
            }
        }

        // Connectivity and acyclicity from the root.
        let mut visited = HashSet::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if !visited.insert(id) {
                return Err(Error::schema(format!("nodes.{id}.parent"), "cycle through node"));
            }
            stack.extend(self.nodes[&id].children.iter().copied());
        }
        if visited.len() != self.nodes.len() {
            let orphan = self
                .nodes
                .keys()
                .find(|id| !visited.contains(id))
                .expect("some node unvisited");
            return Err(Error::schema(
                format!("nodes.{orphan}.parent"),
                "node is not reachable from the root",
            ));
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        root: NodeId,
        current: NodeId,
        nodes: BTreeMap<NodeId, TaskNode>,
        next_round: u64,
    ) -> Result<Self> {
        let next_id = nodes.keys().next_back().map_or(0, |id| id.0 + 1);
        let tree = TaskTree {
            root,
            current,
            nodes,
            next_round,
            next_id,
        };
        tree.validate()?;
        Ok(tree)
    }
}

fn dedup_links(deps: &mut Vec<Dependency>, owner: NodeId) {
    let mut seen = HashSet::new();
    deps.retain(|d| d.to != owner && seen.insert((d.to, d.kind)));
}
