//! Goal decomposition into an initial subtask outline.
//!
//! The planner only creates structure: it adds waiting children under the
//! root with dependency links. Later restructuring belongs to the inference
//! module.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{LinkKind, NodeId, TaskTree};
use crate::trim::tokens;

/// Template set shipped with the library.
pub const BUILTIN_TEMPLATES: &str = include_str!("../templates/planner.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal(String);

impl Goal {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidArgument("goal must not be empty".into()));
        }
        Ok(Goal(text))
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStep {
    pub action: String,
    #[serde(default)]
    pub depends_on_indices: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOutline {
    pub steps: Vec<PlanStep>,
    /// Set when no template matched the goal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl PlanOutline {
    pub fn new(steps: Vec<PlanStep>) -> Result<Self> {
        let outline = PlanOutline { steps, warning: None };
        outline.check()?;
        Ok(outline)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn link_count(&self) -> usize {
        self.steps.iter().map(|s| s.depends_on_indices.len()).sum()
    }

    /// Steps have non-empty actions and depend only on earlier steps, once
    /// each.
    pub fn check(&self) -> Result<()> {
        for (i, step) in self.steps.iter().enumerate() {
            if step.action.trim().is_empty() {
                return Err(Error::schema(format!("steps[{i}].action"), "action must not be empty"));
            }
            for (k, &dep) in step.depends_on_indices.iter().enumerate() {
                let path = format!("steps[{i}].depends_on_indices[{k}]");
                if dep >= i {
                    return Err(Error::schema(path, format!("step {i} may only depend on earlier steps, got {dep}")));
                }
                if step.depends_on_indices[..k].contains(&dep) {
                    return Err(Error::schema(path, format!("duplicate dependency {dep}")));
                }
            }
        }
        Ok(())
    }
}

pub trait Decomposer: Send + Sync {
    fn name(&self) -> &str;
    fn decompose(&self, goal: &Goal) -> Result<PlanOutline>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTemplate {
    /// Every keyword phrase must occur in the goal as whole tokens.
    pub match_keywords: Vec<String>,
    pub steps: Vec<PlanStep>,
}

impl PlanTemplate {
    fn matches(&self, goal_tokens: &[String]) -> bool {
        self.match_keywords.iter().all(|phrase| {
            let phrase = tokens(phrase);
            !phrase.is_empty() && goal_tokens.windows(phrase.len()).any(|w| w == phrase.as_slice())
        })
    }
}

/// Decomposer driven by a template file: the first template whose keywords
/// all occur in the goal supplies the steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateDecomposer {
    templates: Vec<PlanTemplate>,
}

impl TemplateDecomposer {
    pub const NAME: &'static str = "template";

    pub fn new(templates: Vec<PlanTemplate>) -> Result<Self> {
        for (i, t) in templates.iter().enumerate() {
            if t.match_keywords.iter().all(|k| tokens(k).is_empty()) {
                return Err(Error::schema(format!("[{i}].match_keywords"), "needs at least one keyword"));
            }
            PlanOutline {
                steps: t.steps.clone(),
                warning: None,
            }
            .check()
            .map_err(|e| match e {
                Error::Schema { path, message } => Error::schema(format!("[{i}].{path}"), message),
                other => other,
            })?;
        }
        Ok(TemplateDecomposer { templates })
    }

    /// Parses a template file: `[{match_keywords, steps}]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let templates: Vec<PlanTemplate> = serde_path_to_error::deserialize(&mut de)
            .map_err(|err| Error::schema(err.path().to_string(), err.inner().to_string()))?;
        de.end().map_err(|err| Error::schema(".", err.to_string()))?;
        TemplateDecomposer::new(templates)
    }

    pub fn builtin() -> Self {
        TemplateDecomposer::from_json(BUILTIN_TEMPLATES).expect("built-in templates are valid")
    }

    pub fn templates(&self) -> &[PlanTemplate] {
        &self.templates
    }
}

impl Decomposer for TemplateDecomposer {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn decompose(&self, goal: &Goal) -> Result<PlanOutline> {
        let goal_tokens = tokens(goal.text());
        Ok(match self.templates.iter().find(|t| t.matches(&goal_tokens)) {
            Some(t) => PlanOutline {
                steps: t.steps.clone(),
                warning: None,
            },
            None => PlanOutline {
                steps: Vec::new(),
                warning: Some(format!("no template matches goal `{}`", goal.text())),
            },
        })
    }
}

/// Decomposers by name. The default registry holds the built-in template
/// decomposer.
#[derive(Clone)]
pub struct DecomposerRegistry {
    entries: BTreeMap<String, Arc<dyn Decomposer>>,
}

impl DecomposerRegistry {
    pub fn empty() -> Self {
        DecomposerRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, decomposer: Arc<dyn Decomposer>) {
        self.entries.insert(decomposer.name().to_string(), decomposer);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Decomposer>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("decomposer `{name}`")))
    }
}

impl Default for DecomposerRegistry {
    fn default() -> Self {
        let mut registry = DecomposerRegistry::empty();
        registry.register(Arc::new(TemplateDecomposer::builtin()));
        registry
    }
}

pub fn decompose(goal: &Goal, decomposer_name: &str, registry: &DecomposerRegistry) -> Result<PlanOutline> {
    let outline = registry.get(decomposer_name)?.decompose(goal)?;
    if let Some(warning) = &outline.warning {
        log::warn!("{warning}");
    }
    outline.check()?;
    Ok(outline)
}

/// Adds one waiting child of the root per step, plus a `depends_on` link per
/// dependency index. Returns the new ids in step order. On error the tree is
/// unchanged.
pub fn populate(tree: &mut TaskTree, outline: &PlanOutline) -> Result<Vec<NodeId>> {
    outline.check()?;
    let mut work = tree.clone();
    let mut ids = Vec::with_capacity(outline.steps.len());
    for step in &outline.steps {
        ids.push(work.add_child(work.root(), &step.action, None)?);
    }
    for (step, &id) in outline.steps.iter().zip(&ids) {
        for &dep in &step.depends_on_indices {
            work.add_dependency(id, ids[dep], LinkKind::DependsOn)?;
        }
    }
    *tree = work;
    Ok(ids)
}
