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

//! MurmurHash3 x64_128, used to map categorical values into a fixed integer
//! domain before bucketing.

const C1: u64 = 0x87c3_7b91_1142_53d5;
const C2: u64 = 0x4cf5_ad43_2745_937f;

#[inline]
fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

#[inline]
fn mix_k1(k1: u64) -> u64 {
    k1.wrapping_mul(C1).rotate_left(31).wrapping_mul(C2)
}

#[inline]
fn mix_k2(k2: u64) -> u64 {
    k2.wrapping_mul(C2).rotate_left(33).wrapping_mul(C1)
}

/// Full 128-bit MurmurHash3 (x64 variant), returned as `(h1, h2)`.
pub fn murmur3_x64_128(data: &[u8], seed: u64) -> (u64, u64) {
    let mut h1 = seed;
    let mut h2 = seed;

    let mut blocks = data.chunks_exact(16);
    for block in &mut blocks {
        let k1 = u64::from_le_bytes(block[..8].try_into().unwrap());
        let k2 = u64::from_le_bytes(block[8..].try_into().unwrap());

        h1 ^= mix_k1(k1);
        h1 = h1
            .rotate_left(27)
            .wrapping_add(h2)
            .wrapping_mul(5)
            .wrapping_add(0x52dc_e729);

        h2 ^= mix_k2(k2);
        h2 = h2
            .rotate_left(31)
            .wrapping_add(h1)
            .wrapping_mul(5)
            .wrapping_add(0x3849_5ab5);
    }

    let tail = blocks.remainder();
    if tail.len() > 8 {
        let mut buf = [0u8; 8];
        buf[..tail.len() - 8].copy_from_slice(&tail[8..]);
        h2 ^= mix_k2(u64::from_le_bytes(buf));
    }
    if !tail.is_empty() {
        let mut buf = [0u8; 8];
        let n = tail.len().min(8);
        buf[..n].copy_from_slice(&tail[..n]);
        h1 ^= mix_k1(u64::from_le_bytes(buf));
    }

    let len = data.len() as u64;
    h1 ^= len;
    h2 ^= len;
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    (h1, h2)
}

/// The hash used for categorical bucketing: MurmurHash3 x64_128 with seed 0,
/// truncated to its first 64 output bits (the little-endian `h1` word).
#[inline]
pub fn hash64(data: &[u8]) -> u64 {
    murmur3_x64_128(data, 0).0
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden values from an independent reference implementation, itself
    // cross-checked against published x64_128 vectors.
    #[test]
    fn hash64_golden() {
        assert_eq!(hash64(b""), 0);
        assert_eq!(hash64(b"hello"), 0xcbd8_a7b3_41bd_9b02);
        assert_eq!(hash64(b"a"), 0x8555_5565_f659_7889);
        assert_eq!(hash64(b"b"), 0x7a98_a957_b1d3_d1ee);
        assert_eq!(hash64(b"city"), 0x9014_fb4e_a3f4_6e4c);
    }

    #[test]
    fn full_width_vectors() {
        let cases: [(&[u8], u64, u64); 4] = [
            (
                b"The quick brown fox jumps over the lazy dog",
                0xe34bbc7bbc071b6c,
                0x7a433ca9c49a9347,
            ),
            (
                b"The quick brown fox jumps over the lazy dogdogdog",
                0x9c8205300e612fc4,
                0xcbc0af6136aa3df9,
            ),
            (
                b"The quick brown fox jumps over the lazy1",
                0xe3301a827e5cdfe3,
                0xbdbf05f8da0f0392,
            ),
            // remainder = 0
            (
                b"The quick brown fox jumps over t",
                0xdf6af91bb29bdacf,
                0x91a341c58df1f3a6,
            ),
        ];
        for (key, h1, h2) in cases {
            assert_eq!(murmur3_x64_128(key, 0), (h1, h2));
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(hash64(b"repeat me"), hash64(b"repeat me"));
    }
}
