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

use zerocard::eval::{evaluate, render_table, without_timing, Estimator, ReportSet};
use zerocard::serve::respond;
use zerocard_core::{Error, Query};

struct Fixed(u64);

impl Estimator for Fixed {
    fn name(&self) -> String {
        format!("fixed{}", self.0)
    }

    fn estimate(&self, query: &Query) -> zerocard_core::Result<u64> {
        if query.table_id == "missing" {
            return Err(Error::UnknownColumn("c".into()));
        }
        Ok(self.0)
    }

    fn size_bytes(&self) -> u64 {
        8
    }
}

fn workload(cards: &[u64]) -> Vec<Query> {
    cards
        .iter()
        .map(|&c| {
            let mut q = Query::new("t", vec![]);
            q.true_card = Some(c);
            q
        })
        .collect()
}

#[test]
fn perfect_and_failing_estimators() {
    let w = workload(&[5, 5, 5]);
    let perfect = evaluate(&Fixed(5), &w, 0.0).unwrap();
    assert_eq!(perfect.failure_rate, 0.0);
    assert_eq!(perfect.errors.unwrap().quantiles.as_array(), [1.0; 5]);
    assert_eq!(perfect.model_size_bytes, 8);

    let zero = evaluate(&Fixed(0), &w, 0.0).unwrap();
    assert_eq!(zero.failure_rate, 1.0);
    assert!(zero.errors.is_none());

    assert_eq!(
        evaluate(&Fixed(1), &[], 0.0).unwrap_err().code(),
        "EmptyWorkload"
    );
}

#[test]
fn text_table_is_aligned() {
    let w = workload(&[1, 10, 100]);
    let set = ReportSet {
        queries: 3,
        embedding_seconds: 0.5,
        reports: vec![
            evaluate(&Fixed(10), &w, 0.1).unwrap(),
            evaluate(&Fixed(0), &w, 0.0).unwrap(),
        ],
    };
    let text = render_table(&set);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("fixed10"));
    assert!(lines[2].contains("100.00"));
    let stripped = without_timing(&set);
    assert_eq!(stripped.embedding_seconds, 0.0);
    assert!(stripped
        .reports
        .iter()
        .all(|r| r.inference_seconds == 0.0 && r.build_seconds == 0.0));
}

#[test]
fn service_responses() {
    let ok = respond(&Fixed(7), r#"{"table_id":"t","predicates":[]}"#);
    assert_eq!(ok["estimate"], 7);
    let err = respond(&Fixed(7), r#"{"table_id":"missing","predicates":[]}"#);
    assert_eq!(err["error"], "UnknownColumn");
    let garbage = respond(&Fixed(7), "not json");
    assert_eq!(garbage["error"], "ParseError");
}
