use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentHint {
    Normal,
    Correction,
    ReviewSubmit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptRound {
    pub user: String,
    pub assistant_baseline: String,
    /// Reply used for the TET run; falls back to `assistant_baseline`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assistant_tet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent_hint: Option<IntentHint>,
}

impl ScriptRound {
    pub fn new(user: &str, reply: &str) -> Self {
        ScriptRound {
            user: user.into(),
            assistant_baseline: reply.into(),
            assistant_tet: None,
            intent_hint: None,
        }
    }

    pub fn reply_tet(&self) -> &str {
        self.assistant_tet.as_deref().unwrap_or(&self.assistant_baseline)
    }

    pub fn hint(&self) -> IntentHint {
        self.intent_hint.unwrap_or(IntentHint::Normal)
    }

    fn check(&self, at: &str) -> Result<()> {
        let fields = [
            ("user", Some(self.user.as_str())),
            ("assistant_baseline", Some(self.assistant_baseline.as_str())),
            ("assistant_tet", self.assistant_tet.as_deref()),
        ];
        for (name, value) in fields {
            if value.is_some_and(|v| v.trim().is_empty()) {
                return Err(Error::schema(format!("{at}.{name}"), "text must not be empty"));
            }
        }
        Ok(())
    }
}

/// Scripted session: one round per user turn, with the replies to replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionScript {
    pub rounds: Vec<ScriptRound>,
}

impl SessionScript {
    pub fn new(rounds: Vec<ScriptRound>) -> Result<Self> {
        let script = SessionScript { rounds };
        script.check()?;
        Ok(script)
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.rounds.is_empty() {
            return Err(Error::schema("rounds", "a script needs at least one round"));
        }
        for (i, round) in self.rounds.iter().enumerate() {
            round.check(&format!("rounds[{i}]"))?;
        }
        Ok(())
    }

    /// Parses a `{"rounds": [...]}` document.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let script: SessionScript = serde_path_to_error::deserialize(&mut de)
            .map_err(|err| Error::schema(err.path().to_string(), err.inner().to_string()))?;
        de.end().map_err(|err| Error::schema(".", err.to_string()))?;
        script.check()?;
        Ok(script)
    }

    /// Parses JSON lines, one round object per non-blank line.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut rounds = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let at = format!("line {}", i + 1);
            let mut de = serde_json::Deserializer::from_str(line);
            let round: ScriptRound = serde_path_to_error::deserialize(&mut de).map_err(|err| {
                let path = err.path().to_string();
                let path = if path == "." { at.clone() } else { format!("{at}.{path}") };
                Error::schema(path, err.inner().to_string())
            })?;
            de.end().map_err(|err| Error::schema(at.clone(), err.to_string()))?;
            round.check(&at)?;
            rounds.push(round);
        }
        if rounds.is_empty() {
            return Err(Error::schema("rounds", "a script needs at least one round"));
        }
        Ok(SessionScript { rounds })
    }

    /// Accepts either format: a single object with a `rounds` key is a
    /// document, anything else is read as JSON lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>();
        match values.next() {
            Some(Ok(serde_json::Value::Object(map))) if !map.contains_key("rounds") => SessionScript::from_jsonl(text),
            _ => SessionScript::from_json(text),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scripts always serialize") + "\n"
    }
}
