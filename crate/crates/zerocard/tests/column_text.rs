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

use serde::Deserialize;
use zerocard_core::semantics::serialize_column_text;
use zerocard_core::{ColumnDescriptor, ColumnKind};

#[derive(Deserialize)]
struct Descriptor {
    name: String,
    data_type: String,
    kind: ColumnKind,
    constraints: Option<String>,
    comment: Option<String>,
}

#[derive(Deserialize)]
struct Case {
    descriptor: Descriptor,
    text: String,
}

/// Descriptor to text pairs shared with the embedding exporter.
#[test]
fn shared_serialization_fixture() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/column_text.json");
    let cases: Vec<Case> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(!cases.is_empty());
    for c in cases {
        let d = c.descriptor;
        let mut desc = ColumnDescriptor::new(d.name, d.data_type, d.kind);
        desc.constraints = d.constraints;
        desc.comment = d.comment;
        assert_eq!(serialize_column_text(&desc), c.text);
    }
}
