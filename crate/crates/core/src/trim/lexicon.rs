use serde::{Deserialize, Serialize};

use super::embed::tokens;

/// Keyword markers that override similarity-based inference.
///
/// Each entry is a whitespace-separated token pattern matched against the
/// instruction's tokens. Consecutive words must appear adjacently; `...`
/// stands for any run of tokens, so `change ... to` matches
/// "change my email to".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lexicon {
    pub correction: Vec<String>,
    pub cancellation: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            correction: ["correct", "sorry", "instead", "change ... to"]
                .map(String::from)
                .to_vec(),
            cancellation: ["cancel", "undo", "go back"].map(String::from).to_vec(),
        }
    }
}

impl Lexicon {
    /// First correction marker found in `text`.
    pub fn correction_marker(&self, text: &str) -> Option<&str> {
        first_match(&self.correction, &tokens(text))
    }

    pub fn cancellation_marker(&self, text: &str) -> Option<&str> {
        first_match(&self.cancellation, &tokens(text))
    }

    /// Every token that appears in some marker pattern.
    pub fn marker_tokens(&self) -> impl Iterator<Item = String> + '_ {
        self.correction
            .iter()
            .chain(&self.cancellation)
            .flat_map(|p| tokens(p))
    }
}

fn first_match<'a>(patterns: &'a [String], words: &[String]) -> Option<&'a str> {
    patterns
        .iter()
        .find(|p| pattern_matches(p, words))
        .map(String::as_str)
}

fn pattern_matches(pattern: &str, words: &[String]) -> bool {
    let segments: Vec<Vec<String>> = pattern
        .split("...")
        .map(tokens)
        .filter(|seg| !seg.is_empty())
        .collect();
    if segments.is_empty() {
        return false;
    }
    let mut start = 0;
    for seg in &segments {
        match find_run(&words[start..], seg) {
            Some(at) => start += at + seg.len(),
            None => return false,
        }
    }
    true
}

fn find_run(words: &[String], run: &[String]) -> Option<usize> {
    if run.len() > words.len() {
        return None;
    }
    (0..=words.len() - run.len()).find(|&i| words[i..i + run.len()] == *run)
}
