// Copyright 2026 The Zerocard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Column semantics: schema text serialization and embedding providers.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::hash::hash64;
use crate::table::ColumnDescriptor;
use crate::{Error, Result};

/// Default embedding width.
pub const DEFAULT_DIM: usize = 384;

/// `"name, data_type[, constraints][, comment]"`. Empty optional elements are
/// left out.
pub fn serialize_column_text(descriptor: &ColumnDescriptor) -> String {
    let mut text = descriptor.name.clone();
    let optional = [
        Some(descriptor.data_type.as_str()),
        descriptor.constraints.as_deref(),
        descriptor.comment.as_deref(),
    ];
    for part in optional.into_iter().flatten().filter(|s| !s.is_empty()) {
        text.push_str(", ");
        text.push_str(part);
    }
    text
}

/// Sebastiano Vigna's SplitMix64.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn token_vector(token: &[u8], d: usize, seed: u64) -> Vec<f64> {
    let mut stream = SplitMix64::new(seed ^ hash64(token));
    (0..d).map(|_| 2.0 * stream.next_f64() - 1.0).collect()
}

fn l2_normalized(v: &[f64]) -> Option<Vec<f32>> {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 && norm.is_finite() {
        Some(v.iter().map(|x| (x / norm) as f32).collect())
    } else {
        None
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(ToString::to_string)
        .collect()
}

/// Deterministic stand-in for a sentence encoder: the mean of per-token
/// pseudo-random vectors, L2-normalized. Texts sharing tokens end up close.
pub fn stub_embed(text: &str, d: usize, seed: u64) -> Vec<f32> {
    assert!(d >= 1, "embedding width must be positive");
    let tokens = tokenize(text);
    if !tokens.is_empty() {
        let mut mean = vec![0.0f64; d];
        for t in &tokens {
            for (m, x) in mean.iter_mut().zip(token_vector(t.as_bytes(), d, seed)) {
                *m += x;
            }
        }
        let n = tokens.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        if let Some(v) = l2_normalized(&mean) {
            return v;
        }
    }
    l2_normalized(&token_vector(text.as_bytes(), d, seed)).unwrap_or_else(|| {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    })
}

/// Source of column embeddings keyed by serialized column text.
pub trait EmbeddingProvider {
    fn dim(&self) -> usize;
    fn embed(&self, column_text: &str) -> Result<Vec<f32>>;
}

/// [`stub_embed`] as a provider.
#[derive(Debug, Clone, Copy)]
pub struct StubEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl EmbeddingProvider for StubEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, column_text: &str) -> Result<Vec<f32>> {
        Ok(stub_embed(column_text, self.dim, self.seed))
    }
}

/// Precomputed embeddings. Lookups are exact on the column text; a missing
/// key is an error.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::ShapeMismatch(alloc::format!(
                "embedding of width {} in a store of width {}",
                vector.len(),
                self.dim
            )));
        }
        self.entries.insert(key.into(), vector);
        Ok(())
    }

    pub fn lookup(&self, column_text: &str) -> Result<&[f32]> {
        self.entries
            .get(column_text)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingEmbedding(column_text.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

impl EmbeddingProvider for EmbeddingStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, column_text: &str) -> Result<Vec<f32>> {
        self.lookup(column_text).map(<[f32]>::to_vec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ColumnKind;

    #[test]
    fn serializes_all_four_elements() {
        let d = ColumnDescriptor::new("age", "int", ColumnKind::Numerical)
            .with_constraints("not null")
            .with_comment("user age in years");
        assert_eq!(
            serialize_column_text(&d),
            "age, int, not null, user age in years"
        );
    }

    #[test]
    fn omits_absent_or_empty_elements() {
        let d = ColumnDescriptor::new("city", "varchar", ColumnKind::Categorical);
        assert_eq!(serialize_column_text(&d), "city, varchar");
        let d = ColumnDescriptor::new("x", "", ColumnKind::Numerical);
        assert_eq!(serialize_column_text(&d), "x");
        let d = ColumnDescriptor::new("x", "int", ColumnKind::Numerical).with_comment("");
        assert_eq!(serialize_column_text(&d), "x, int");
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("User_Age, INT"), ["user", "age", "int"]);
        assert!(tokenize(", -- ,").is_empty());
    }

    fn cosine(a: &[f32], b: &[f32]) -> f64 {
        a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
    }

    #[test]
    fn stub_is_deterministic_and_unit_norm() {
        let a = stub_embed("user age, int", 64, 7);
        let b = stub_embed("user age, int", 64, 7);
        assert_eq!(a, b);
        for text in ["user age, int", "", "--", "a"] {
            let v = stub_embed(text, 64, 7);
            let norm: f64 = cosine(&v, &v).sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "{text:?}: {norm}");
        }
    }

    #[test]
    fn store_lookup_and_dimension_check() {
        let mut s = EmbeddingStore::new(2);
        s.insert("id, int", vec![1.0, 0.0]).unwrap();
        assert_eq!(s.lookup("id, int").unwrap(), &[1.0, 0.0]);
        assert!(matches!(
            s.lookup("id, bigint"),
            Err(Error::MissingEmbedding(_))
        ));
        assert!(matches!(
            s.insert("x", vec![1.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
