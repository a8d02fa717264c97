use std::fmt;

use serde::{Deserialize, Serialize};

use super::script::SessionScript;
use crate::error::{Error, Result};
use crate::synth::PromptTranscript;

/// Prompting policy a request was built under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Tet,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Baseline => "baseline",
            Method::Tet => "tet",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClientRequest<'a> {
    /// Zero-based round index.
    pub round: usize,
    pub method: Method,
    pub prompt: &'a PromptTranscript,
}

pub trait ModelClient: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ClientRequest<'_>) -> Result<String>;
}

/// Replays the script's reply for the request's round and method. The
/// prompt is ignored.
#[derive(Debug, Clone)]
pub struct ScriptedClient {
    script: SessionScript,
}

impl ScriptedClient {
    pub const NAME: &'static str = "scripted";

    pub fn new(script: SessionScript) -> Self {
        ScriptedClient { script }
    }
}

impl ModelClient for ScriptedClient {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn complete(&self, request: &ClientRequest<'_>) -> Result<String> {
        let round = self
            .script
            .rounds
            .get(request.round)
            .ok_or_else(|| Error::NotFound(format!("scripted reply for round {}", request.round + 1)))?;
        Ok(match request.method {
            Method::Baseline => round.assistant_baseline.clone(),
            Method::Tet => round.reply_tet().to_string(),
        })
    }
}

/// Resolves a client name: `scripted` replays `script`; `live` is available
/// when built with the `live` feature.
pub fn client_by_name(name: &str, script: &SessionScript) -> Result<Box<dyn ModelClient>> {
    match name {
        ScriptedClient::NAME => Ok(Box::new(ScriptedClient::new(script.clone()))),
        #[cfg(feature = "live")]
        super::live::LiveClient::NAME => Ok(Box::new(super::live::LiveClient::from_env()?)),
        other => Err(Error::NotFound(format!("model client `{other}`"))),
    }
}
