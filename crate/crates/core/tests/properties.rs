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

//! Invariants checked over generated inputs.

use proptest::prelude::*;
use zerocard_core::baselines::{combine_avi, combine_ebo, combine_minsel};
use zerocard_core::distribution::{
    categorical_bucket, conjoin_column_predicates, numeric_distribution, numeric_predicate_vector,
    operator_to_interval, Interval, NumericBuckets,
};
use zerocard_core::features::{PredicateFeatures, QueryFeatures};
use zerocard_core::metrics::{q_error, EstimateRecord, EvalReport};
use zerocard_core::model::{clamp_estimate, HyperParams, ModelParams};
use zerocard_core::semantics::stub_embed;
use zerocard_core::Op;

fn op() -> impl Strategy<Value = Op> {
    prop::sample::select(Op::ALL.to_vec())
}

fn bounds() -> impl Strategy<Value = (f64, f64)> {
    (-1e3..1e3f64, 0.0..1e3f64).prop_map(|(l, w)| (l, l + w))
}

proptest! {
    #[test]
    fn bucket_index_respects_edges((l, u) in bounds(), t in 0.0..=1.0f64, h in 1usize..200) {
        let b = NumericBuckets::new(l, u, h).unwrap();
        let v = l + t * (u - l);
        let i = b.bucket_of(v);
        prop_assert!(i < h);
        if u > l {
            prop_assert!(b.edge(i) <= v);
            prop_assert!(v < b.edge(i + 1) || (i == h - 1 && v <= u));
        }
    }

    #[test]
    fn distributions_are_probability_vectors(
        (l, u) in bounds(),
        ts in prop::collection::vec(0.0..=1.0f64, 1..50),
        h in 1usize..120,
    ) {
        let values: Vec<f64> = ts.iter().map(|t| l + t * (u - l)).collect();
        let d = numeric_distribution(&values, l, u, h).unwrap();
        prop_assert_eq!(d.len(), h);
        prop_assert!(d.iter().all(|&x| x >= 0.0));
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn predicate_vectors_lie_in_unit_interval((l, u) in bounds(), op in op(), t in -0.2..1.2f64, h in 1usize..120) {
        let v = l + t * (u - l);
        let p = numeric_predicate_vector(operator_to_interval(op, v, l, u), l, u, h).unwrap();
        prop_assert_eq!(p.len(), h);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        if op == Op::Eq {
            prop_assert!(p.iter().filter(|&&x| x > 0.0).count() <= 1);
        }
    }

    #[test]
    fn conjunction_is_order_independent(
        (l, u) in bounds(),
        preds in prop::collection::vec((op(), 0.0..=1.0f64), 1..5),
    ) {
        let ivs: Vec<Interval> = preds.iter().map(|(o, t)| operator_to_interval(*o, l + t * (u - l), l, u)).collect();
        let fwd = conjoin_column_predicates(ivs.iter().copied());
        let rev = conjoin_column_predicates(ivs.iter().rev().copied());
        prop_assert_eq!(fwd, rev);
    }

    #[test]
    fn categorical_buckets_in_range(s in ".{0,20}", h in 1usize..500) {
        prop_assert!(categorical_bucket(&s, h) < h);
    }

    #[test]
    fn stub_embeddings_are_unit_norm(s in "[a-z ,_]{0,30}", d in 1usize..64, seed in any::<u64>()) {
        let v = stub_embed(&s, d, seed);
        let n: f64 = v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
        prop_assert!((n - 1.0).abs() < 1e-6);
    }

    #[test]
    fn q_error_is_symmetric_and_at_least_one(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        let q = q_error(a, b).unwrap();
        prop_assert_eq!(q, q_error(b, a).unwrap());
        prop_assert!(q >= 1.0);
        prop_assert_eq!(q == 1.0, a == b);
    }

    #[test]
    fn report_invariants(pairs in prop::collection::vec((1u64..10_000, 0u64..10_000), 1..60)) {
        let records: Vec<EstimateRecord> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(t, e))| EstimateRecord { query_id: i, true_card: t, estimate: e, seconds: 0.0 })
            .collect();
        let r = EvalReport::from_records("m", &records, 0.0, 0).unwrap();
        let failures = pairs.iter().filter(|p| p.1 == 0).count();
        prop_assert_eq!(r.failures, failures);
        prop_assert_eq!(r.failure_rate + (records.len() - failures) as f64 / records.len() as f64, 1.0);
        if let Some(e) = r.errors {
            let q = e.quantiles.as_array();
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(q[0] >= 1.0 && q[4] <= e.max);
        }
        let mut reversed = records.clone();
        reversed.reverse();
        prop_assert_eq!(EvalReport::from_records("m", &reversed, 0.0, 0).unwrap(), r);
    }

    #[test]
    fn heuristics_order(sels in prop::collection::vec(1e-6..=1.0f64, 1..8)) {
        let avi = f64::from(combine_avi(&sels));
        let ebo = f64::from(combine_ebo(&sels));
        let min = combine_minsel(&sels);
        prop_assert!(avi <= ebo * (1.0 + 1e-6));
        prop_assert!(ebo <= min * (1.0 + 1e-6));
    }

    #[test]
    fn clamped_estimate_within_rows(y in -1e3..1e3f64, n in 1u64..10_000_000) {
        let c = clamp_estimate(y, n);
        prop_assert!((1.0..=n as f64).contains(&c));
    }
}

fn small() -> HyperParams {
    HyperParams {
        d: 8,
        h: 6,
        m: 3,
        k: 2,
        heads: 2,
        expert_hidden: vec![8],
        gate_hidden: vec![4],
        est_hidden: vec![8, 4],
        ..HyperParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_outputs_are_well_formed(
        seed in any::<u64>(),
        cols in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 8), prop::collection::vec(0.0..=1.0f64, 6)), 1..5),
        rows in 1u64..1_000_000,
    ) {
        let model = ModelParams::init(small(), seed).unwrap();
        let q = QueryFeatures {
            rows,
            columns: cols.iter().map(|(x, p)| PredicateFeatures { embedding: x.clone(), predicate: p.clone(), distribution: None }).collect(),
            true_card: None,
        };
        let est = model.estimate_cardinality(&q).unwrap();
        prop_assert!((1.0..=rows as f64).contains(&est));

        // Pooling is exactly order-free; attention sums may differ in the last bit.
        let pairs: Vec<(&[f64], &[f64])> = cols.iter().map(|(x, p)| (p.as_slice(), x.as_slice())).collect();
        let rev_pairs: Vec<(&[f64], &[f64])> = pairs.iter().rev().copied().collect();
        prop_assert_eq!(model.encode_query(&pairs).unwrap(), model.encode_query(&rev_pairs).unwrap());
        let mut rev = q.clone();
        rev.columns.reverse();
        prop_assert!((model.log_cardinality(&q).unwrap() - model.log_cardinality(&rev).unwrap()).abs() < 1e-12);

        let x = &cols[0].0;
        let pi = model.predict_distribution(x, x).unwrap();
        prop_assert!(pi.iter().all(|&v| v > 0.0));
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let moe = model.moe_forward(x).unwrap();
        prop_assert_eq!(moe.selected.len(), 2);
        prop_assert!((moe.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
