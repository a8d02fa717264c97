//! Task relationship inference.
//!
//! Given a new instruction and the current tree, decide how the instruction
//! relates to the existing nodes and apply the matching mutation. Inference
//! is a fixed decision procedure: keyword rules first, then similarity bands
//! over embeddings of every live node.

mod classify;
mod config;
mod embed;
mod lexicon;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{LinkKind, NodeId, TaskStatus, TaskTree};

pub use classify::{classifier_by_name, HeuristicClassifier, PairClassifier, PairLabel, DUPLICATE_SIMILARITY};
pub use config::TrimConfig;
pub use embed::{cosine, embedder_by_name, tokens, Embedder, EmbeddingVector, HashedTfEmbedder};
pub use lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationshipLabel {
    DependsOn,
    ParallelWith,
    Replaces,
    Merge,
    Rollback,
    ChildOf,
}

impl fmt::Display for RelationshipLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationshipLabel::DependsOn => "depends_on",
            RelationshipLabel::ParallelWith => "parallel_with",
            RelationshipLabel::Replaces => "replaces",
            RelationshipLabel::Merge => "merge",
            RelationshipLabel::Rollback => "rollback",
            RelationshipLabel::ChildOf => "child_of",
        })
    }
}

/// Similarity band boundaries: `high > moderate > 0`, `high <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub high: f64,
    pub moderate: f64,
}

impl Thresholds {
    pub fn new(high: f64, moderate: f64) -> Result<Self> {
        let t = Thresholds { high, moderate };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.high <= 1.0 && self.high > self.moderate && self.moderate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "thresholds need 1 >= high > moderate > 0, got high={} moderate={}",
                self.high, self.moderate
            )))
        }
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            high: 0.80,
            moderate: 0.60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub label: RelationshipLabel,
    pub target: NodeId,
    pub score: f64,
    pub rationale: String,
}

/// Inference engine: embedder, thresholds and keyword lexicon.
#[derive(Clone)]
pub struct Trim {
    embedder: Arc<dyn Embedder>,
    thresholds: Thresholds,
    lexicon: Lexicon,
}

impl Default for Trim {
    fn default() -> Self {
        Trim::new(
            Arc::new(HashedTfEmbedder::default()),
            Thresholds::default(),
            Lexicon::default(),
        )
    }
}

impl fmt::Debug for Trim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trim")
            .field("embedder", &self.embedder.name())
            .field("thresholds", &self.thresholds)
            .field("lexicon", &self.lexicon)
            .finish()
    }
}

struct Candidate {
    id: NodeId,
    score: f64,
    round: Option<u64>,
}

impl Trim {
    pub fn new(embedder: Arc<dyn Embedder>, thresholds: Thresholds, lexicon: Lexicon) -> Self {
        Trim {
            embedder,
            thresholds,
            lexicon,
        }
    }

    pub fn from_config(config: &TrimConfig) -> Result<Self> {
        config.thresholds.check()?;
        Ok(Trim::new(
            embedder_by_name(&config.embedder)?,
            config.thresholds,
            config.lexicon.clone(),
        ))
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    /// Similarity between an instruction and a node's text.
    pub fn similarity(&self, instruction: &str, tree: &TaskTree, id: NodeId) -> Result<f64> {
        let node = tree.get(id)?;
        cosine(
            &self.embedder.embed(instruction),
            &self.embedder.embed(&node.similarity_text()),
        )
    }

    /// Highest-scoring live node. Ties go to the node with the most recent
    /// revision, then to the newer id.
    fn best_match(&self, instruction: &str, tree: &TaskTree) -> Candidate {
        let query = self.embedder.embed(instruction);
        tree.nodes()
            .filter(|n| n.status != TaskStatus::Invalidated)
            .map(|n| Candidate {
                id: n.id,
                score: cosine(&query, &self.embedder.embed(&n.similarity_text()))
                    .expect("one embedder yields one dimension"),
                round: n.last_round(),
            })
            .max_by(|a, b| {
                a.score
                    .total_cmp(&b.score)
                    .then(a.round.cmp(&b.round))
                    .then(a.id.cmp(&b.id))
            })
            // Every node invalidated.
            .unwrap_or(Candidate {
                id: tree.root(),
                score: 0.0,
                round: None,
            })
    }

    /// Decides how `instruction` relates to the tree.
    ///
    /// 1. A correction marker whose best-matching node is done → merge into it.
    /// 2. A cancellation marker → roll back to the nearest done ancestor of
    ///    the current node (the root if there is none).
    /// 3. Otherwise, with `s` the best similarity over live nodes:
    ///    `s >= high` → replaces (target done/failed) or merge (target open);
    ///    `moderate <= s < high` → depends_on the target;
    ///    `s < moderate` → child_of the nearest open node on the active path.
    pub fn infer(&self, instruction: &str, tree: &TaskTree) -> InferenceResult {
        let best = self.best_match(instruction, tree);
        let best_status = tree.get(best.id).map(|n| n.status).unwrap_or(TaskStatus::Active);

        if let Some(marker) = self.lexicon.correction_marker(instruction) {
            if best_status == TaskStatus::Done {
                return InferenceResult {
                    label: RelationshipLabel::Merge,
                    target: best.id,
                    score: best.score,
                    rationale: format!(
                        "correction marker `{marker}`; best match node {} is done ({:.3})",
                        best.id, best.score
                    ),
                };
            }
        }

        if let Some(marker) = self.lexicon.cancellation_marker(instruction) {
            let target = tree
                .ancestors(tree.current())
                .into_iter()
                .find(|id| tree.get(*id).map(|n| n.status) == Ok(TaskStatus::Done))
                .unwrap_or(tree.root());
            let score = self.similarity(instruction, tree, target).unwrap_or(0.0);
            return InferenceResult {
                label: RelationshipLabel::Rollback,
                target,
                score,
                rationale: format!("cancellation marker `{marker}`; rolling back to node {target}"),
            };
        }

        let t = self.thresholds;
        let (label, target, band) = if best.score >= t.high {
            match best_status {
                TaskStatus::Done | TaskStatus::Failed => (RelationshipLabel::Replaces, best.id, "high, finished target"),
                _ => (RelationshipLabel::Merge, best.id, "high, open target"),
            }
        } else if best.score >= t.moderate {
            (RelationshipLabel::DependsOn, best.id, "moderate")
        } else {
            (RelationshipLabel::ChildOf, tree.open_anchor(), "low")
        };
        InferenceResult {
            label,
            target,
            score: best.score,
            rationale: format!("{band} similarity {:.3} to node {}", best.score, best.id),
        }
    }
}

/// [`Trim::infer`] with the reference embedder and default lexicon.
pub fn infer_structural_relationship(instruction: &str, tree: &TaskTree, thresholds: Thresholds) -> InferenceResult {
    Trim::new(Arc::new(HashedTfEmbedder::default()), thresholds, Lexicon::default()).infer(instruction, tree)
}

/// Applies an inference result and returns the node now carrying the
/// instruction, which also becomes current. On error the tree is unchanged.
pub fn apply(tree: &mut TaskTree, result: &InferenceResult, instruction: &str) -> Result<NodeId> {
    let mut work = tree.clone();
    let carrier = apply_in_place(&mut work, result, instruction)?;
    *tree = work;
    Ok(carrier)
}

fn apply_in_place(tree: &mut TaskTree, result: &InferenceResult, instruction: &str) -> Result<NodeId> {
    let target = result.target;
    let target_parent = tree.get(target)?.parent;

    let carrier = match result.label {
        RelationshipLabel::Merge => {
            let host = target_parent.unwrap_or(target);
            let fresh = tree.add_child(host, instruction, Some(instruction))?;
            tree.merge_nodes(target, fresh)?;
            target
        }
        RelationshipLabel::Replaces => {
            let parent = target_parent
                .ok_or_else(|| Error::InvalidArgument("the root cannot be replaced".into()))?;
            if tree.get(target)?.status != TaskStatus::Invalidated {
                tree.set_status(target, TaskStatus::Invalidated)?;
            }
            let fresh = tree.add_child(parent, instruction, Some(instruction))?;
            tree.add_dependency(fresh, target, LinkKind::Replaces)?;
            fresh
        }
        RelationshipLabel::Rollback => {
            tree.rollback_to(target)?;
            tree.record_io(target, Some(instruction), None)?;
            target
        }
        RelationshipLabel::DependsOn => {
            let fresh = tree.add_child(tree.open_anchor(), instruction, Some(instruction))?;
            tree.add_dependency(fresh, target, LinkKind::DependsOn)?;
            fresh
        }
        RelationshipLabel::ChildOf => tree.add_child(target, instruction, Some(instruction))?,
        RelationshipLabel::ParallelWith => {
            let host = target_parent.unwrap_or(target);
            let fresh = tree.add_child(host, instruction, Some(instruction))?;
            tree.add_dependency(fresh, target, LinkKind::ParallelWith)?;
            fresh
        }
    };

    tree.set_current(carrier)?;
    if tree.get(carrier)?.status == TaskStatus::Waiting {
        tree.set_status(carrier, TaskStatus::Active)?;
    }
    Ok(carrier)
}

#[cfg(test)]
mod tests;
