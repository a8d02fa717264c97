use serde::{Deserialize, Serialize};

use super::{HashedTfEmbedder, HeuristicClassifier, Lexicon, Thresholds};
use crate::error::{Error, Result};

/// Inference settings as loaded from a JSON document. Every key is optional:
///
/// ```json
/// {
///   "thresholds": {"high": 0.8, "moderate": 0.6},
///   "lexicon": {"correction": ["sorry", "change ... to"], "cancellation": ["undo"]},
///   "embedder": "hashed-tf",
///   "classifier": "heuristic"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrimConfig {
    pub thresholds: Thresholds,
    pub lexicon: Lexicon,
    pub embedder: String,
    pub classifier: String,
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig {
            thresholds: Thresholds::default(),
            lexicon: Lexicon::default(),
            embedder: HashedTfEmbedder::NAME.to_string(),
            classifier: HeuristicClassifier::NAME.to_string(),
        }
    }
}

impl TrimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let config: TrimConfig = serde_path_to_error::deserialize(&mut de)
            .map_err(|err| Error::schema(err.path().to_string(), err.inner().to_string()))?;
        de.end().map_err(|err| Error::schema(".", err.to_string()))?;
        config
            .thresholds
            .check()
            .map_err(|err| Error::schema("thresholds", err.to_string()))?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes") + "\n"
    }
}
