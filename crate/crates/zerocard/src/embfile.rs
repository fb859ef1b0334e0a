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

//! The `ZCEMB1` embedding store format.
//!
//! Layout: the bytes `ZCEMB1\n`, a little-endian `u32` header length, a UTF-8
//! JSON header `{"d", "count", "normalized"}`, then `count` records of
//! `u32` key length, key bytes and `d` little-endian `f32` components.

use std::path::Path;

use serde::{Deserialize, Serialize};
use zerocard_core::semantics::{
    serialize_column_text, stub_embed, EmbeddingProvider, EmbeddingStore,
};
use zerocard_core::Table;

use crate::error::{CliError, Result};
use crate::ingest::write_file;

pub const EMBEDDING_MAGIC: &[u8] = b"ZCEMB1\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    d: usize,
    count: usize,
    normalized: bool,
}

/// Serializes `store` in key order.
pub fn encode_embeddings(store: &EmbeddingStore) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        d: store.dim(),
        count: store.len(),
        normalized: true,
    })
    .expect("serializable header");
    let mut out = EMBEDDING_MAGIC.to_vec();
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (key, vector) in store.iter() {
        out.extend_from_slice(&(key.len() as u32).to_le_bytes());
        out.extend_from_slice(key.as_bytes());
        for x in vector {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub(crate) struct Cursor<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let slice = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(slice)
    }

    pub fn u32(&mut self) -> Option<u32> {
        self.take(4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("four bytes")))
    }
}

pub fn decode_embeddings(bytes: &[u8], path: &Path) -> Result<EmbeddingStore> {
    let bad = |m: &str| CliError::format(path, m);
    if !bytes.starts_with(EMBEDDING_MAGIC) {
        return Err(bad("not a ZCEMB1 embedding file"));
    }
    let mut cur = Cursor {
        bytes,
        pos: EMBEDDING_MAGIC.len(),
    };
    let len = cur.u32().ok_or_else(|| bad("truncated header length"))? as usize;
    let raw = cur.take(len).ok_or_else(|| bad("truncated header"))?;
    let header: Header =
        serde_json::from_slice(raw).map_err(|e| bad(&format!("invalid header: {e}")))?;
    if header.d == 0 {
        return Err(bad("embedding dimension must be positive"));
    }
    let mut store = EmbeddingStore::new(header.d);
    for i in 0..header.count {
        let truncated = || bad(&format!("truncated record {i}"));
        let klen = cur.u32().ok_or_else(truncated)? as usize;
        let key = cur.take(klen).ok_or_else(truncated)?;
        let key =
            std::str::from_utf8(key).map_err(|_| bad(&format!("record {i} key is not UTF-8")))?;
        let raw = cur.take(header.d * 4).ok_or_else(truncated)?;
        let vector = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
            .collect();
        store
            .insert(key, vector)
            .map_err(|e| bad(&format!("record {i}: {e}")))?;
    }
    if cur.pos != bytes.len() {
        return Err(bad("trailing bytes after the last record"));
    }
    Ok(store)
}

pub fn save_embeddings(store: &EmbeddingStore, path: &Path) -> Result<()> {
    write_file(path, &encode_embeddings(store))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_embeddings(&bytes, path)
}

/// Stub embeddings for every column text in `tables`.
pub fn stub_store(tables: &[Table], d: usize, seed: u64) -> Result<EmbeddingStore> {
    let mut store = EmbeddingStore::new(d);
    for t in tables {
        for c in t.columns() {
            let text = serialize_column_text(&c.descriptor);
            let v = stub_embed(&text, d, seed);
            store.insert(text, v)?;
        }
    }
    Ok(store)
}
