//! Structured task memory for multi-step agent sessions.
//!
//! - [`tree`]: the Task Memory Tree and its mutations.
//! - [`trim`]: relationship inference between a new instruction and the tree.
//! - [`synth`]: prompt transcripts synthesized from the active path.
//! - [`tokenize`]: tokenizer registry used for accounting.
//! - [`metrics`]: linear full-history baseline and token reports.
//! - [`planner`]: template-driven goal decomposition.
//! - [`session`]: scripted session runner tying it all together.

pub mod error;
pub mod tree;
pub mod metrics;
pub mod planner;
pub mod session;
pub mod synth;
pub mod tokenize;
pub mod trim;

pub use error::{Error, Result};
