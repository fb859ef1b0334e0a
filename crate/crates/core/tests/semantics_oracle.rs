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

//! Reference construction of stub embeddings, written out directly from the
//! definition: SplitMix64 streams seeded per token, components `2u - 1`,
//! mean over tokens, then L2 normalization.

use zerocard_core::hash::hash64;
use zerocard_core::semantics::stub_embed;

fn splitmix_stream(seed: u64, d: usize) -> Vec<f64> {
    let mut state = seed;
    (0..d)
        .map(|_| {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            let u = (z >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * u - 1.0
        })
        .collect()
}

fn reference(text: &str, d: usize, seed: u64) -> Vec<f64> {
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    let mut sum = vec![0.0; d];
    for t in &tokens {
        for (s, x) in sum
            .iter_mut()
            .zip(splitmix_stream(seed ^ hash64(t.as_bytes()), d))
        {
            *s += x;
        }
    }
    let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    sum.iter().map(|x| x / norm).collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn splitmix_reference_vector() {
    let mut g = zerocard_core::semantics::SplitMix64::new(1234567);
    assert_eq!(g.next_u64(), 6457827717110365317);
    assert_eq!(g.next_u64(), 3203168211198807973);
}

#[test]
fn implementation_matches_reference() {
    for text in [
        "user age, int",
        "city name, varchar",
        "id, bigint, primary key",
    ] {
        for d in [8, 384] {
            let got = stub_embed(text, d, 7);
            let want = reference(text, d, 7);
            for (g, w) in got.iter().zip(&want) {
                assert!((f64::from(*g) - w).abs() < 1e-6, "{text} d={d}");
            }
        }
    }
}

#[test]
fn shared_tokens_dominate_similarity() {
    let a = reference("user age, int", 384, 0);
    let b = reference("user age, bigint", 384, 0);
    let c = reference("city name, varchar", 384, 0);
    assert!(cosine(&a, &b) > cosine(&a, &c));

    let to64 = |v: Vec<f32>| v.into_iter().map(f64::from).collect::<Vec<_>>();
    let ia = to64(stub_embed("user age, int", 384, 0));
    let ib = to64(stub_embed("user age, bigint", 384, 0));
    let ic = to64(stub_embed("city name, varchar", 384, 0));
    assert!(cosine(&ia, &ib) > cosine(&ia, &ic));
    assert_eq!(cosine(&ia, &ia).to_bits(), cosine(&ia, &ia).to_bits());
}
