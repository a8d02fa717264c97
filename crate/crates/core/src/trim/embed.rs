use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;

use crate::error::{Error, Result};

/// Dense embedding. The reference embedder returns unit-norm vectors, or the
/// zero vector for text without tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Text embedder. Implementations must be callable from many threads.
pub trait Embedder: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, text: &str) -> EmbeddingVector;
}

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Term-frequency vector over a hashed vocabulary (FNV-1a, 64 bit, reduced
/// modulo the dimension), L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedTfEmbedder {
    dim: usize,
}

impl HashedTfEmbedder {
    pub const NAME: &'static str = "hashed-tf";
    pub const DEFAULT_DIM: usize = 256;

    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashedTfEmbedder { dim }
    }

    fn bucket(&self, token: &str) -> usize {
        let mut hasher = FnvHasher::default();
        hasher.write(token.as_bytes());
        (hasher.finish() % self.dim as u64) as usize
    }
}

impl Default for HashedTfEmbedder {
    fn default() -> Self {
        HashedTfEmbedder::new(Self::DEFAULT_DIM)
    }
}

impl Embedder for HashedTfEmbedder {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn embed(&self, text: &str) -> EmbeddingVector {
        let mut values = vec![0.0; self.dim];
        for token in tokens(text) {
            values[self.bucket(&token)] += 1.0;
        }
        let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingVector(values)
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            u.dim(),
            v.dim()
        )));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn embedder_by_name(name: &str) -> Result<Arc<dyn Embedder>> {
    match name {
        HashedTfEmbedder::NAME => Ok(Arc::new(HashedTfEmbedder::default())),
        other => Err(Error::NotFound(format!("embedder `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sim(a: &str, b: &str) -> f64 {
        let e = HashedTfEmbedder::default();
        cosine(&e.embed(a), &e.embed(b)).unwrap()
    }

    #[test]
    fn repeated_tokens_scale_away() {
        assert!((sim("name name", "name") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let v = HashedTfEmbedder::default().embed("");
        assert_eq!(v.dim(), 256);
        assert!(v.values().iter().all(|x| *x == 0.0));
        assert_eq!(sim("", "anything"), 0.0);
        assert_eq!(HashedTfEmbedder::default().embed("?!, ..").norm(), 0.0);
    }

    #[test]
    fn embeddings_are_unit_norm() {
        for text in ["a", "My name is John Doe.", "Help me fill out a form, I will provide some of my information to you."] {
            let n = HashedTfEmbedder::default().embed(text).norm();
            assert!((n - 1.0).abs() < 1e-12, "{text}: {n}");
        }
    }

    #[test]
    fn tokens_split_on_non_alphanumerics() {
        assert_eq!(tokens("My email is john@example.com."), ["my", "email", "is", "john", "example", "com"]);
        assert!(tokens("  ..  ").is_empty());
    }

    // Expected values computed by hand from the token sets: the two name
    // sentences share 4 of 5 tokens (4/5 = 0.8); name vs email shares
    // {my, is, john} out of 5 and 6 tokens (3/sqrt(30)). No bucket collisions
    // occur among these tokens.
    #[test]
    fn name_sentences_are_closer_than_name_and_email() {
        let same_field = sim("my name is John Doe", "my name is John Smith");
        let other_field = sim("my name is John Doe", "my email is john@example.com");
        assert!((same_field - 0.8).abs() < 1e-12, "{same_field}");
        assert!((other_field - 3.0 / 30f64.sqrt()).abs() < 1e-12, "{other_field}");
        assert!(same_field > other_field);
    }

    #[test]
    fn cosine_identity_and_orthogonality() {
        let v = EmbeddingVector::new(vec![0.3, -1.2, 4.0]);
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let x = EmbeddingVector::new(vec![1.0, 0.0]);
        let y = EmbeddingVector::new(vec![0.0, 1.0]);
        assert_eq!(cosine(&x, &y).unwrap(), 0.0);
        let zero = EmbeddingVector::new(vec![0.0, 0.0]);
        assert_eq!(cosine(&x, &zero).unwrap(), 0.0);
    }

    #[test]
    fn cosine_rejects_dimension_mismatch() {
        let x = EmbeddingVector::new(vec![1.0, 0.0]);
        let y = EmbeddingVector::new(vec![1.0, 0.0, 0.0]);
        assert!(matches!(cosine(&x, &y), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cosine_matches_direct_arithmetic_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let dim = rng.gen_range(1..32);
            let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
            // Accumulate in a different order from the implementation.
            let mut dot = 0.0;
            let mut na = 0.0;
            let mut nb = 0.0;
            for i in (0..dim).rev() {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            let expected = dot / (na.sqrt() * nb.sqrt());
            let got = cosine(&EmbeddingVector::new(a), &EmbeddingVector::new(b)).unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn registry_knows_the_reference_embedder() {
        assert_eq!(embedder_by_name("hashed-tf").unwrap().name(), "hashed-tf");
        assert!(matches!(embedder_by_name("minilm"), Err(Error::NotFound(_))));
    }
}
