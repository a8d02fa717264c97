//! Prompt synthesis from the active node path.
//!
//! A node contributes its revision dialogue: each revision as a user turn,
//! followed by the assistant reply recorded for it, in round order. Path
//! mode walks root → current; summary mode lists every live node for
//! review/submit rounds. Invalidated nodes never contribute.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::{Tokenizer, TokenizerRegistry};
use crate::tree::{LinkKind, NodeId, TaskStatus, TaskTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Assistant,
    System,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::User => "User",
            Role::Assistant => "Assistant",
            Role::System => "System",
        }
    }

    const ALL: [Role; 3] = [Role::User, Role::Assistant, Role::System];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One role-tagged turn. `source_node` records which tree node produced it,
/// when it came from a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turn {
    pub role: Role,
    pub text: String,
    pub source_node: Option<NodeId>,
}

impl Turn {
    pub fn new(role: Role, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if role != Role::System && text.trim().is_empty() {
            return Err(Error::InvalidArgument(format!("{role} turn text must not be empty")));
        }
        Ok(Turn {
            role,
            text,
            source_node: None,
        })
    }

    pub fn user(text: impl Into<String>) -> Result<Self> {
        Turn::new(Role::User, text)
    }

    pub fn assistant(text: impl Into<String>) -> Result<Self> {
        Turn::new(Role::Assistant, text)
    }

    pub fn from_node(mut self, id: NodeId) -> Self {
        self.source_node = Some(id);
        self
    }

    /// `"<Role>: <text>"`.
    pub fn render(&self) -> String {
        format!("{}: {}", self.role.label(), self.text)
    }

    fn same_content(&self, other: &Turn) -> bool {
        self.role == other.role && self.text == other.text
    }
}

/// Ordered turns for one model call. Adjacent identical turns collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptTranscript {
    turns: Vec<Turn>,
}

impl PromptTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_turns(turns: impl IntoIterator<Item = Turn>) -> Self {
        let mut transcript = PromptTranscript::new();
        for turn in turns {
            transcript.push(turn);
        }
        transcript
    }

    /// Appends a turn unless it repeats the previous one.
    pub fn push(&mut self, turn: Turn) {
        if self.turns.last().is_some_and(|last| last.same_content(&turn)) {
            return;
        }
        self.turns.push(turn);
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Appendix layout: `User: ...` / `Assistant: ...` lines joined by `\n`.
    pub fn render(&self) -> String {
        self.turns.iter().map(Turn::render).collect::<Vec<_>>().join("\n")
    }

    /// Inverse of [`render`](Self::render). A line starting with a role
    /// label opens a turn; any other line continues the previous turn.
    pub fn parse(text: &str) -> Result<Self> {
        let mut turns: Vec<Turn> = Vec::new();
        for (index, line) in text.split('\n').enumerate() {
            if text.is_empty() {
                break;
            }
            let opened = Role::ALL.iter().find_map(|role| {
                line.strip_prefix(role.label())
                    .and_then(|rest| rest.strip_prefix(": "))
                    .map(|rest| (*role, rest))
            });
            match (opened, turns.last_mut()) {
                (Some((role, rest)), _) => {
                    turns.push(Turn {
                        role,
                        text: rest.to_string(),
                        source_node: None,
                    });
                }
                (None, Some(last)) => {
                    last.text.push('\n');
                    last.text.push_str(line);
                }
                (None, None) => {
                    return Err(Error::schema(
                        format!("line {}", index + 1),
                        "expected a `User: `, `Assistant: ` or `System: ` prefix",
                    ));
                }
            }
        }
        let mut transcript = PromptTranscript::new();
        for (i, turn) in turns.into_iter().enumerate() {
            let checked = Turn::new(turn.role, turn.text)
                .map_err(|e| Error::schema(format!("turn {}", i + 1), e.to_string()))?;
            transcript.push(checked);
        }
        Ok(transcript)
    }

    /// Structured export: `[{"role","text","source_node"}]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts always serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let turns: Vec<Turn> = serde_path_to_error::deserialize(&mut de)
            .map_err(|err| Error::schema(err.path().to_string(), err.inner().to_string()))?;
        de.end().map_err(|err| Error::schema(".", err.to_string()))?;
        let mut transcript = PromptTranscript::new();
        for (i, turn) in turns.into_iter().enumerate() {
            let source = turn.source_node;
            let mut checked =
                Turn::new(turn.role, turn.text).map_err(|e| Error::schema(format!("[{i}].text"), e.to_string()))?;
            checked.source_node = source;
            transcript.push(checked);
        }
        Ok(transcript)
    }
}

impl fmt::Display for PromptTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render(transcript: &PromptTranscript) -> String {
    transcript.render()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisPolicy {
    /// Lead with the root node's dialogue.
    pub include_root_context: bool,
    /// Also include `depends_on` targets of path nodes, before the node.
    pub include_dependency_nodes: bool,
    /// List every live node instead of only the active path.
    pub summary_mode: bool,
}

impl Default for SynthesisPolicy {
    fn default() -> Self {
        SynthesisPolicy {
            include_root_context: true,
            include_dependency_nodes: false,
            summary_mode: false,
        }
    }
}

impl SynthesisPolicy {
    pub fn summary() -> Self {
        SynthesisPolicy {
            summary_mode: true,
            ..Self::default()
        }
    }
}

/// Revision dialogue of one node: user turn per revision, each followed by
/// its recorded reply.
pub fn node_dialogue(tree: &TaskTree, id: NodeId) -> Vec<Turn> {
    let Some(node) = tree.node(id) else {
        return Vec::new();
    };
    if node.status == TaskStatus::Invalidated {
        return Vec::new();
    }
    let mut turns = Vec::with_capacity(node.revisions.len() * 2);
    for rev in &node.revisions {
        turns.push(Turn {
            role: Role::User,
            text: rev.text.clone(),
            source_node: Some(id),
        });
        if let Some(reply) = &rev.reply {
            turns.push(Turn {
                role: Role::Assistant,
                text: reply.clone(),
                source_node: Some(id),
            });
        }
    }
    turns
}

/// Builds the prompt transcript for the tree's current state.
pub fn synthesize(tree: &TaskTree, policy: &SynthesisPolicy) -> PromptTranscript {
    let mut transcript = PromptTranscript::new();
    let mut emitted: HashSet<NodeId> = HashSet::new();
    let root = tree.root();
    let current = tree.current();

    let mut emit = |transcript: &mut PromptTranscript, id: NodeId| {
        if emitted.insert(id) {
            for turn in node_dialogue(tree, id) {
                transcript.push(turn);
            }
        }
    };

    if policy.include_root_context {
        emit(&mut transcript, root);
    }

    if policy.summary_mode {
        for id in tree.preorder() {
            if id != root && id != current {
                emit(&mut transcript, id);
            }
        }
        if current != root {
            emit(&mut transcript, current);
        }
        return transcript;
    }

    let path = tree.active_path();
    let on_path: HashSet<NodeId> = path.iter().copied().collect();
    for &id in path.iter().skip(1) {
        if policy.include_dependency_nodes {
            let node = tree.node(id).expect("path nodes exist");
            for dep in &node.dependencies {
                if dep.kind == LinkKind::DependsOn && !on_path.contains(&dep.to) {
                    emit(&mut transcript, dep.to);
                }
            }
        }
        emit(&mut transcript, id);
    }
    transcript
}

/// Token count of a transcript: per-turn counts of the rendered line, each
/// plus a fixed overhead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCount {
    pub per_turn: Vec<usize>,
    pub total: usize,
}

/// Tokenizer plus per-turn overhead (default 0), for modelling chat-format
/// wrapper tokens.
#[derive(Clone)]
pub struct CostModel {
    tokenizer: Arc<dyn Tokenizer>,
    per_turn_overhead: usize,
}

impl fmt::Debug for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostModel")
            .field("tokenizer", &self.tokenizer.name())
            .field("per_turn_overhead", &self.per_turn_overhead)
            .finish()
    }
}

impl CostModel {
    pub fn new(tokenizer: Arc<dyn Tokenizer>) -> Self {
        CostModel {
            tokenizer,
            per_turn_overhead: 0,
        }
    }

    pub fn with_overhead(mut self, per_turn: usize) -> Self {
        self.per_turn_overhead = per_turn;
        self
    }

    pub fn tokenizer(&self) -> &Arc<dyn Tokenizer> {
        &self.tokenizer
    }

    pub fn count_text(&self, text: &str) -> usize {
        self.tokenizer.count(text)
    }

    pub fn count(&self, transcript: &PromptTranscript) -> TokenCount {
        let per_turn: Vec<usize> = transcript
            .turns()
            .iter()
            .map(|t| self.tokenizer.count(&t.render()) + self.per_turn_overhead)
            .collect();
        let total = per_turn.iter().sum();
        TokenCount { per_turn, total }
    }

    /// Cost of one node: tokens of its rendered dialogue.
    pub fn node_cost(&self, tree: &TaskTree, id: NodeId) -> usize {
        self.count(&PromptTranscript::from_turns(node_dialogue(tree, id))).total
    }
}

/// Counts a transcript with a named tokenizer from the registry.
pub fn count_tokens(registry: &TokenizerRegistry, tokenizer_name: &str, transcript: &PromptTranscript) -> Result<TokenCount> {
    Ok(CostModel::new(registry.get(tokenizer_name)?).count(transcript))
}
