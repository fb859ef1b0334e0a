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

//! The `ZCMDL1` parameter file format.
//!
//! Layout: the bytes `ZCMDL1\n`, a little-endian `u32` header length, a JSON
//! header holding the format version, the hyperparameters and an ordered
//! tensor manifest, then every tensor's `f64` values (little-endian,
//! row-major) in manifest order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use zerocard_core::model::{HyperParams, ModelParams};

use crate::embfile::Cursor;
use crate::error::{CliError, Result};
use crate::ingest::write_file;

pub const MODEL_MAGIC: &[u8] = b"ZCMDL1\n";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    pub hyper: HyperParams,
    pub tensors: Vec<TensorEntry>,
}

pub fn encode_model(params: &ModelParams) -> Vec<u8> {
    let tensors = params.tensors();
    let header = ModelHeader {
        version: MODEL_VERSION,
        hyper: params.hyper.clone(),
        tensors: tensors
            .iter()
            .map(|(name, t)| TensorEntry {
                name: name.clone(),
                shape: [t.rows(), t.cols()],
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("serializable header");
    let mut out = MODEL_MAGIC.to_vec();
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, t) in &tensors {
        for x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_model(bytes: &[u8], path: &Path) -> Result<ModelParams> {
    let bad = |m: String| CliError::format(path, m);
    let magic_len = MODEL_MAGIC.len();
    if bytes.len() >= magic_len && bytes.starts_with(b"ZCMDL") && !bytes.starts_with(MODEL_MAGIC) {
        return Err(CliError::VersionMismatch {
            path: path.to_path_buf(),
            expected: "ZCMDL1".into(),
            found: String::from_utf8_lossy(&bytes[..magic_len - 1]).into_owned(),
        });
    }
    if !bytes.starts_with(MODEL_MAGIC) {
        return Err(bad("not a ZCMDL1 model file".into()));
    }
    let mut cur = Cursor {
        bytes,
        pos: magic_len,
    };
    let len = cur
        .u32()
        .ok_or_else(|| bad("truncated header length".into()))? as usize;
    let raw = cur
        .take(len)
        .ok_or_else(|| bad("truncated header".into()))?;
    let header: ModelHeader =
        serde_json::from_slice(raw).map_err(|e| bad(format!("invalid header: {e}")))?;
    if header.version != MODEL_VERSION {
        return Err(CliError::VersionMismatch {
            path: path.to_path_buf(),
            expected: MODEL_VERSION.to_string(),
            found: header.version.to_string(),
        });
    }
    header
        .hyper
        .validate()
        .map_err(|e| bad(format!("invalid hyperparameters: {e}")))?;

    let mut params = ModelParams::init(header.hyper.clone(), 0)?;
    let expected: Vec<(String, [usize; 2])> = params
        .tensors()
        .iter()
        .map(|(n, t)| (n.clone(), [t.rows(), t.cols()]))
        .collect();
    if expected.len() != header.tensors.len() {
        return Err(CliError::Shape {
            path: path.to_path_buf(),
            message: format!(
                "hyperparameters imply {} tensors, manifest lists {}",
                expected.len(),
                header.tensors.len()
            ),
        });
    }
    for ((name, shape), entry) in expected.iter().zip(&header.tensors) {
        if *name != entry.name {
            return Err(bad(format!(
                "manifest tensor `{}` where `{name}` was expected",
                entry.name
            )));
        }
        if *shape != entry.shape {
            return Err(CliError::Shape {
                path: path.to_path_buf(),
                message: format!(
                    "tensor `{name}` has shape {:?} but the hyperparameters imply {shape:?}",
                    entry.shape
                ),
            });
        }
    }
    for (tensor, (name, _)) in params.tensors_mut().into_iter().zip(&expected) {
        let n = tensor.data().len();
        let raw = cur
            .take(n * 8)
            .ok_or_else(|| bad(format!("truncated values of `{name}`")))?;
        for (dst, chunk) in tensor.data_mut().iter_mut().zip(raw.chunks_exact(8)) {
            *dst = f64::from_le_bytes(chunk.try_into().expect("eight bytes"));
        }
    }
    if cur.pos != bytes.len() {
        return Err(bad("trailing bytes after the last tensor".into()));
    }
    Ok(params)
}

pub fn save_model(params: &ModelParams, path: &Path) -> Result<u64> {
    let bytes = encode_model(params);
    write_file(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_model(&bytes, path)
}
