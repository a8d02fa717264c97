use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::embed::{cosine, tokens, Embedder};
use super::{Lexicon, Thresholds};
use crate::error::{Error, Result};
use crate::tree::TaskNode;

/// Label for a (step, historical node) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    Duplicate,
    Superset,
    DependsOn,
    Conflict,
    Unrelated,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::Duplicate => "duplicate",
            PairLabel::Superset => "superset",
            PairLabel::DependsOn => "depends_on",
            PairLabel::Conflict => "conflict",
            PairLabel::Unrelated => "unrelated",
        })
    }
}

/// Pluggable pair classifier. A learned model can sit behind this trait;
/// [`HeuristicClassifier`] is the reference implementation.
pub trait PairClassifier: Send + Sync {
    fn name(&self) -> &str;
    fn classify(&self, step: &str, node: &TaskNode) -> PairLabel;
}

pub const DUPLICATE_SIMILARITY: f64 = 0.95;

const STOPWORDS: &[&str] = &[
    "the", "and", "for", "you", "your", "with", "this", "that", "are", "was", "please", "can", "will",
];

pub struct HeuristicClassifier {
    embedder: Arc<dyn Embedder>,
    thresholds: Thresholds,
    lexicon: Lexicon,
}

impl HeuristicClassifier {
    pub const NAME: &'static str = "heuristic";

    pub fn new(embedder: Arc<dyn Embedder>, thresholds: Thresholds, lexicon: Lexicon) -> Self {
        HeuristicClassifier {
            embedder,
            thresholds,
            lexicon,
        }
    }

    fn content_tokens(&self, text: &str) -> BTreeSet<String> {
        let markers: BTreeSet<String> = self.lexicon.marker_tokens().collect();
        tokens(text)
            .into_iter()
            .filter(|t| t.chars().count() >= 3 && !STOPWORDS.contains(&t.as_str()) && !markers.contains(t))
            .collect()
    }
}

impl PairClassifier for HeuristicClassifier {
    fn name(&self) -> &str {
        Self::NAME
    }

    /// In order: near-identical text is a duplicate; a step whose token set
    /// strictly contains the node's and is at least moderately similar is a
    /// superset; a correction sharing content words is a conflict; anything
    /// else at moderate similarity or above depends on the node.
    fn classify(&self, step: &str, node: &TaskNode) -> PairLabel {
        let node_text = node.similarity_text();
        let score = cosine(&self.embedder.embed(step), &self.embedder.embed(&node_text))
            .expect("one embedder yields one dimension");
        if score >= DUPLICATE_SIMILARITY {
            return PairLabel::Duplicate;
        }

        let step_tokens: BTreeSet<String> = tokens(step).into_iter().collect();
        let node_tokens: BTreeSet<String> = tokens(&node_text).into_iter().collect();
        if !node_tokens.is_empty()
            && step_tokens.is_superset(&node_tokens)
            && step_tokens.len() > node_tokens.len()
            && score >= self.thresholds.moderate
        {
            return PairLabel::Superset;
        }

        if self.lexicon.correction_marker(step).is_some()
            && !self
                .content_tokens(step)
                .is_disjoint(&self.content_tokens(&node_text))
        {
            return PairLabel::Conflict;
        }

        if score >= self.thresholds.moderate {
            PairLabel::DependsOn
        } else {
            PairLabel::Unrelated
        }
    }
}

pub fn classifier_by_name(
    name: &str,
    embedder: Arc<dyn Embedder>,
    thresholds: Thresholds,
    lexicon: Lexicon,
) -> Result<Arc<dyn PairClassifier>> {
    match name {
        HeuristicClassifier::NAME => Ok(Arc::new(HeuristicClassifier::new(embedder, thresholds, lexicon))),
        other => Err(Error::NotFound(format!("classifier `{other}`"))),
    }
}
