//! Chat-completions adapter for a live model endpoint.
//!
//! Configured through environment variables:
//! - `TME_LIVE_ENDPOINT`: full URL of an OpenAI-compatible
//!   `/v1/chat/completions` endpoint.
//! - `TME_LIVE_API_KEY`: bearer token.
//! - `TME_LIVE_MODEL`: model name sent with each request.
//!
//! Requests are issued one at a time with a 60 second timeout; no retries.

use std::time::Duration;

use serde_json::{json, Value};

use super::client::{ClientRequest, ModelClient};
use crate::error::{Error, Result};
use crate::synth::Role;

pub const ENDPOINT_VAR: &str = "TME_LIVE_ENDPOINT";
pub const API_KEY_VAR: &str = "TME_LIVE_API_KEY";
pub const MODEL_VAR: &str = "TME_LIVE_MODEL";

pub struct LiveClient {
    endpoint: String,
    api_key: String,
    model: String,
    http: reqwest::blocking::Client,
}

impl LiveClient {
    pub const NAME: &'static str = "live";

    pub fn from_env() -> Result<Self> {
        let var = |name: &str| {
            std::env::var(name).map_err(|_| Error::InvalidArgument(format!("live client needs ${name}")))
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(LiveClient {
            endpoint: var(ENDPOINT_VAR)?,
            api_key: var(API_KEY_VAR)?,
            model: var(MODEL_VAR)?,
            http,
        })
    }
}

impl ModelClient for LiveClient {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn complete(&self, request: &ClientRequest<'_>) -> Result<String> {
        let messages: Vec<Value> = request
            .prompt
            .turns()
            .iter()
            .map(|t| {
                let role = match t.role {
                    Role::User => "user",
                    Role::Assistant => "assistant",
                    Role::System => "system",
                };
                json!({ "role": role, "content": t.text })
            })
            .collect();
        let body: Value = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&json!({ "model": self.model, "messages": messages }))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| Error::Io(e.to_string()))?;
        body["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Io("response has no choices[0].message.content".into()))
    }
}
