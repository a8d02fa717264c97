//! End-to-end scripted sessions.
//!
//! Each user turn goes through relationship inference, tree mutation and
//! prompt synthesis (TET) or through plain history concatenation
//! (baseline). Replies come from a [`ModelClient`] and are recorded on the
//! node that carried the turn.

mod client;
#[cfg(feature = "live")]
pub mod live;
mod script;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{baseline_prompt, plot_data_csv, render_table, TableFormat, TokenReport, TokenRow};
use crate::synth::{synthesize, CostModel, PromptTranscript, SynthesisPolicy, Turn};
use crate::tokenize::{Tokenizer, TokenizerRegistry};
use crate::tree::{LinkKind, NodeId, TaskStatus, TaskTree};
use crate::trim::{apply, InferenceResult, RelationshipLabel, Trim};

pub use client::{client_by_name, ClientRequest, Method, ModelClient, ScriptedClient};
pub use script::{IntentHint, ScriptRound, SessionScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Tet,
    Baseline,
    Both,
}

impl Mode {
    fn runs(self, method: Method) -> bool {
        matches!(
            (self, method),
            (Mode::Both, _) | (Mode::Tet, Method::Tet) | (Mode::Baseline, Method::Baseline)
        )
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tet" => Ok(Mode::Tet),
            "baseline" => Ok(Mode::Baseline),
            "both" => Ok(Mode::Both),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}` (expected tet, baseline or both)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Tet => "tet",
            Mode::Baseline => "baseline",
            Mode::Both => "both",
        })
    }
}

/// One method's pass over a script.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub tree: TaskTree,
    /// Prompt sent in each round.
    pub transcripts: Vec<PromptTranscript>,
    pub replies: Vec<String>,
    pub prompt_tokens: Vec<usize>,
    pub completion_tokens: Vec<usize>,
    /// Inference decision per round; `None` for the first round and for
    /// baseline runs.
    pub decisions: Vec<Option<InferenceResult>>,
}

impl MethodRun {
    fn new(method: Method, tree: TaskTree) -> Self {
        MethodRun {
            method,
            tree,
            transcripts: Vec::new(),
            replies: Vec::new(),
            prompt_tokens: Vec::new(),
            completion_tokens: Vec::new(),
            decisions: Vec::new(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.transcripts.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub mode: Mode,
    pub tet: Option<MethodRun>,
    pub baseline: Option<MethodRun>,
    /// Present when both methods ran.
    pub report: Option<TokenReport>,
}

impl SessionResult {
    /// The TET tree when TET ran, otherwise the baseline chain.
    pub fn tree(&self) -> &TaskTree {
        self.tet
            .as_ref()
            .or(self.baseline.as_ref())
            .map(|run| &run.tree)
            .expect("at least one method runs")
    }

    pub fn runs(&self) -> impl Iterator<Item = &MethodRun> {
        self.tet.iter().chain(self.baseline.iter())
    }

    /// Writes `round<N>.<method>.txt` transcripts, `tree.json` (plus
    /// `baseline_tree.json` when both ran), and `report.csv` / `plot.csv`
    /// when a report exists.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for run in self.runs() {
            for (i, transcript) in run.transcripts.iter().enumerate() {
                let mut text = transcript.render();
                text.push('\n');
                fs::write(dir.join(format!("round{}.{}.txt", i + 1, run.method)), text)?;
            }
        }
        fs::write(dir.join("tree.json"), self.tree().to_json())?;
        if let (Some(_), Some(baseline)) = (&self.tet, &self.baseline) {
            fs::write(dir.join("baseline_tree.json"), baseline.tree.to_json())?;
        }
        if let Some(report) = &self.report {
            fs::write(dir.join("report.csv"), render_table(report, TableFormat::Csv))?;
            fs::write(dir.join("plot.csv"), plot_data_csv(report))?;
        }
        Ok(())
    }
}

/// Session configuration: inference engine, tokenizer and synthesis policy.
#[derive(Debug, Clone)]
pub struct SessionRunner {
    pub trim: Trim,
    pub cost: CostModel,
    pub policy: SynthesisPolicy,
}

impl SessionRunner {
    pub fn new(tokenizer: Arc<dyn Tokenizer>) -> Self {
        SessionRunner {
            trim: Trim::default(),
            cost: CostModel::new(tokenizer),
            policy: SynthesisPolicy::default(),
        }
    }

    pub fn run(&self, script: &SessionScript, mode: Mode, client: &dyn ModelClient) -> Result<SessionResult> {
        script.check()?;
        let tet = if mode.runs(Method::Tet) {
            Some(self.run_tet(script, client)?)
        } else {
            None
        };
        let baseline = if mode.runs(Method::Baseline) {
            Some(self.run_baseline(script, client)?)
        } else {
            None
        };
        let report = match (&tet, &baseline) {
            (Some(t), Some(b)) => Some(TokenReport::new(
                (0..script.len())
                    .map(|i| {
                        TokenRow::new(
                            i + 1,
                            (b.prompt_tokens[i], t.prompt_tokens[i]),
                            (b.completion_tokens[i], t.completion_tokens[i]),
                        )
                    })
                    .collect(),
            )?),
            _ => None,
        };
        Ok(SessionResult {
            mode,
            tet,
            baseline,
            report,
        })
    }

    fn run_tet(&self, script: &SessionScript, client: &dyn ModelClient) -> Result<MethodRun> {
        let first = &script.rounds[0];
        let mut run = MethodRun::new(Method::Tet, TaskTree::new(&first.user).map_err(in_round(0))?);
        for (i, round) in script.rounds.iter().enumerate() {
            self.tet_round(&mut run, i, round, client).map_err(in_round(i))?;
        }
        Ok(run)
    }

    fn tet_round(&self, run: &mut MethodRun, i: usize, round: &ScriptRound, client: &dyn ModelClient) -> Result<()> {
        let tree = &mut run.tree;
        let (carrier, decision) = if i == 0 {
            let root = tree.root();
            tree.record_io(root, Some(&round.user), None)?;
            (root, None)
        } else {
            let decision = self.trim.infer(&round.user, tree);
            check_hint(i, round.hint(), &decision);
            let carrier = apply(tree, &decision, &round.user)?;
            (carrier, Some(decision))
        };

        let review = round.hint() == IntentHint::ReviewSubmit;
        if review {
            link_review_dependencies(tree, carrier)?;
        }
        let policy = SynthesisPolicy {
            summary_mode: self.policy.summary_mode || review,
            ..self.policy
        };
        let prompt = synthesize(tree, &policy);
        let reply = client.complete(&ClientRequest {
            round: i,
            method: Method::Tet,
            prompt: &prompt,
        })?;
        tree.record_io(carrier, None, Some(&reply))?;
        if carrier != tree.root() && tree.get(carrier)?.status == TaskStatus::Active {
            tree.set_status(carrier, TaskStatus::Done)?;
        }

        run.prompt_tokens.push(self.cost.count(&prompt).total);
        run.completion_tokens.push(self.cost.count_text(&reply));
        run.transcripts.push(prompt);
        run.replies.push(reply);
        run.decisions.push(decision);
        Ok(())
    }

    /// Baseline keeps a linear chain: each round appends one node under the
    /// previous round's node.
    fn run_baseline(&self, script: &SessionScript, client: &dyn ModelClient) -> Result<MethodRun> {
        let first = &script.rounds[0];
        let mut run = MethodRun::new(Method::Baseline, TaskTree::new(&first.user).map_err(in_round(0))?);
        let mut history: Vec<Turn> = Vec::new();
        for (i, round) in script.rounds.iter().enumerate() {
            let step = |run: &mut MethodRun, history: &mut Vec<Turn>| -> Result<()> {
                let tree = &mut run.tree;
                let node = if i == 0 {
                    let root = tree.root();
                    tree.record_io(root, Some(&round.user), None)?;
                    root
                } else {
                    let node = tree.add_child(tree.current(), &round.user, Some(&round.user))?;
                    tree.set_current(node)?;
                    tree.set_status(node, TaskStatus::Active)?;
                    node
                };
                let user = Turn::user(&round.user)?.from_node(node);
                let prompt = baseline_prompt(history, &user);
                let reply = client.complete(&ClientRequest {
                    round: i,
                    method: Method::Baseline,
                    prompt: &prompt,
                })?;
                tree.record_io(node, None, Some(&reply))?;
                if node != tree.root() {
                    tree.set_status(node, TaskStatus::Done)?;
                }
                history.push(user);
                history.push(Turn::assistant(&reply)?.from_node(node));

                run.prompt_tokens.push(self.cost.count(&prompt).total);
                run.completion_tokens.push(self.cost.count_text(&reply));
                run.transcripts.push(prompt);
                run.replies.push(reply);
                run.decisions.push(None);
                Ok(())
            };
            step(&mut run, &mut history).map_err(in_round(i))?;
        }
        Ok(run)
    }
}

fn in_round(index: usize) -> impl Fn(Error) -> Error {
    move |source| Error::Session {
        round: index + 1,
        source: Box::new(source),
    }
}

/// A review/submit node depends on every finished sibling.
fn link_review_dependencies(tree: &mut TaskTree, carrier: NodeId) -> Result<()> {
    let Some(parent) = tree.get(carrier)?.parent else {
        return Ok(());
    };
    let siblings: Vec<NodeId> = tree
        .get(parent)?
        .children
        .iter()
        .copied()
        .filter(|&id| id != carrier)
        .collect();
    for id in siblings {
        let node = tree.get(id)?;
        if node.status == TaskStatus::Done && !tree.get(carrier)?.depends_on(id) {
            tree.add_dependency(carrier, id, LinkKind::DependsOn)?;
        }
    }
    Ok(())
}

fn check_hint(index: usize, hint: IntentHint, decision: &InferenceResult) {
    use RelationshipLabel::*;
    let consistent = match hint {
        IntentHint::Correction => matches!(decision.label, Merge | Replaces),
        IntentHint::ReviewSubmit => matches!(decision.label, ChildOf | DependsOn | ParallelWith),
        IntentHint::Normal => !matches!(decision.label, Merge | Rollback),
    };
    if !consistent {
        log::warn!(
            "round {}: intent hint {hint:?} disagrees with inferred {} ({})",
            index + 1,
            decision.label,
            decision.rationale
        );
    }
}

/// Runs `script` with named client and tokenizer from the default
/// registries.
pub fn run_session(script: &SessionScript, mode: Mode, client_name: &str, tokenizer_name: &str) -> Result<SessionResult> {
    let tokenizer = TokenizerRegistry::default().get(tokenizer_name)?;
    let client = client_by_name(client_name, script)?;
    SessionRunner::new(tokenizer).run(script, mode, client.as_ref())
}
