//! Tokenizers used for prompt/completion accounting.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Whitespace-delimited words, with each of `. , : ; ? ! @` counted as its
/// own token. "My name is John Doe." is six tokens.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceTokenizer;

impl ReferenceTokenizer {
    pub const NAME: &'static str = "reference";
    pub const PUNCTUATION: [char; 7] = ['.', ',', ':', ';', '?', '!', '@'];
}

impl Tokenizer for ReferenceTokenizer {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace()
            .map(|chunk| {
                let mut count = 0;
                let mut in_word = false;
                for c in chunk.chars() {
                    if Self::PUNCTUATION.contains(&c) {
                        count += 1;
                        in_word = false;
                    } else if !in_word {
                        count += 1;
                        in_word = true;
                    }
                }
                count
            })
            .sum()
    }
}

/// OpenAI `cl100k_base` byte-pair encoding. The rank table is loaded on
/// first use and shared by every instance.
#[cfg(feature = "bpe")]
#[derive(Debug, Clone, Copy, Default)]
pub struct Cl100kTokenizer;

#[cfg(feature = "bpe")]
impl Cl100kTokenizer {
    pub const NAME: &'static str = "cl100k";

    fn bpe() -> &'static tiktoken_rs::CoreBPE {
        static BPE: std::sync::OnceLock<tiktoken_rs::CoreBPE> = std::sync::OnceLock::new();
        BPE.get_or_init(|| tiktoken_rs::cl100k_base().expect("embedded cl100k ranks load"))
    }
}

#[cfg(feature = "bpe")]
impl Tokenizer for Cl100kTokenizer {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn count(&self, text: &str) -> usize {
        Self::bpe().encode_ordinary(text).len()
    }
}

/// Tokenizers by name.
#[derive(Clone)]
pub struct TokenizerRegistry {
    entries: BTreeMap<String, Arc<dyn Tokenizer>>,
}

impl TokenizerRegistry {
    pub fn empty() -> Self {
        TokenizerRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, tokenizer: Arc<dyn Tokenizer>) {
        self.entries.insert(tokenizer.name().to_string(), tokenizer);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Tokenizer>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("tokenizer `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl Default for TokenizerRegistry {
    /// The reference tokenizer, plus `cl100k` when built with the `bpe`
    /// feature.
    fn default() -> Self {
        let mut registry = TokenizerRegistry::empty();
        registry.register(Arc::new(ReferenceTokenizer));
        #[cfg(feature = "bpe")]
        registry.register(Arc::new(Cl100kTokenizer));
        registry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand count: each whitespace chunk contributes its punctuation marks
    /// plus one per maximal run of other characters.
    #[test]
    fn reference_counts() {
        let t = ReferenceTokenizer;
        assert_eq!(t.count(""), 0);
        assert_eq!(t.count("   \n "), 0);
        assert_eq!(t.count("My name is John Doe."), 6);
        // john @ example . com .
        assert_eq!(t.count("john@example.com."), 6);
        // User : Hi
        assert_eq!(t.count("User: Hi"), 3);
        assert_eq!(t.count("Of course! Please"), 4);
        assert_eq!(t.count("..."), 3);
        assert_eq!(t.count("don't"), 1);
    }

    #[test]
    fn registry_lookup() {
        let registry = TokenizerRegistry::default();
        assert_eq!(registry.get("reference").unwrap().count("a b"), 2);
        assert!(matches!(registry.get("gpt-9"), Err(Error::NotFound(_))));
    }

    #[cfg(feature = "bpe")]
    #[test]
    fn cl100k_is_registered() {
        let registry = TokenizerRegistry::default();
        let bpe = registry.get("cl100k").unwrap();
        assert_eq!(bpe.count(""), 0);
        assert_eq!(bpe.count("hello world"), 2);
    }
}
