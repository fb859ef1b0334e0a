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

//! Query workloads as JSON lines, one query per line:
//!
//! ```json
//! {"table_id":"orders","predicates":[{"column":"price","op":"<","value":20.0}],"true_card":31}
//! ```

use std::path::Path;

use zerocard_core::Query;

use crate::error::{CliError, Result};
use crate::ingest::write_file;

pub fn encode_workload(queries: &[Query]) -> String {
    let mut out = String::new();
    for q in queries {
        out.push_str(&serde_json::to_string(q).expect("serializable query"));
        out.push('\n');
    }
    out
}

pub fn save_workload(queries: &[Query], path: &Path) -> Result<()> {
    write_file(path, encode_workload(queries).as_bytes())
}

pub fn parse_workload(text: &str, path: &Path) -> Result<Vec<Query>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| CliError::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                column: e.column().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_workload(path: &Path) -> Result<Vec<Query>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_workload(&text, path)
}
