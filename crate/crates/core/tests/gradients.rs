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

//! Analytic gradients of the composite loss against central differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zerocard_core::features::{QueryFeatures, TableEncoder};
use zerocard_core::model::{Ablation, HyperParams, ModelParams};
use zerocard_core::semantics::StubEmbedder;
use zerocard_core::synth::{synth_corpus, SynthConfig};
use zerocard_core::training::{
    composite_gradient, composite_loss, finite_diff_gradient, generate_queries, GenerationConfig,
    TrainConfig,
};

fn hyper() -> HyperParams {
    HyperParams {
        d: 16,
        h: 8,
        m: 3,
        k: 2,
        heads: 2,
        expert_hidden: vec![12],
        gate_hidden: vec![6],
        est_hidden: vec![24, 12],
        ..HyperParams::default()
    }
}

fn batch(seed: u64) -> Vec<QueryFeatures> {
    let cfg = SynthConfig {
        min_rows: 80,
        max_rows: 80,
        min_columns: 6,
        max_columns: 6,
        null_rate: 0.05,
    };
    let table = synth_corpus(1, seed, &cfg).unwrap().remove(0);
    let enc = TableEncoder::new(&table, &StubEmbedder { dim: 16, seed: 1 }, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_queries(&table, 5, &mut rng, GenerationConfig::default())
        .unwrap()
        .iter()
        .map(|q| enc.training_features(q).unwrap())
        .collect()
}

fn check(hyper: HyperParams, seed: u64) {
    let params = ModelParams::init(hyper, seed).unwrap();
    let batch = batch(seed);
    assert!(batch.iter().any(|q| q.columns.len() > 1));
    let cfg = TrainConfig::default();
    let refs: Vec<&QueryFeatures> = batch.iter().collect();
    let mut analytic = params.zeros_like();
    composite_gradient(&params, &refs, &cfg, &mut analytic).unwrap();
    let step = 1e-5;
    let loss = composite_loss(&params, &batch, &cfg).unwrap().total;
    let numeric = finite_diff_gradient(
        |p| composite_loss(p, &batch, &cfg).unwrap().total,
        &params,
        step,
    );
    // Rounding in two loss evaluations bounds central-difference accuracy at
    // about eps·|L|/step, whatever the gradient's magnitude.
    let floor = 4.0 * f64::EPSILON * loss.abs().max(1.0) / step;
    let mut worst: f64 = 0.0;

    let mut checked = 0;
    for ((name, a), (_, n)) in analytic.tensors().iter().zip(numeric.tensors()) {
        for (i, (&ga, &gn)) in a.data().iter().zip(n.data()).enumerate() {
            if ga.abs() > 1e-8 {
                let scale = ga.abs().max(gn.abs());
                let diff = (ga - gn).abs();
                assert!(
                    diff <= 1e-4 * scale + floor,
                    "{name}[{i}]: analytic {ga:e} numeric {gn:e}"
                );
                if scale > 1e5 * floor {
                    worst = worst.max(diff / scale);
                }
                checked += 1;
            } else {
                assert!(
                    gn.abs() < 1e-6,
                    "{name}[{i}]: analytic {ga:e} numeric {gn:e}"
                );
            }
        }
    }
    assert!(checked > 100, "only {checked} gradients checked");
    assert!(
        worst <= 1e-4,
        "worst relative error {worst:e} above the rounding floor"
    );
}

#[test]
fn full_model() {
    check(hyper(), 3);
}

#[test]
fn separate_layers_with_selectivity_feature() {
    check(
        HyperParams {
            share_moe: false,
            dist_feature: true,
            ..hyper()
        },
        4,
    );
}

#[test]
fn ablations() {
    for a in [Ablation::NoMoe, Ablation::NoCorrelation, Ablation::NoDist] {
        check(hyper().with_ablation(a), 5);
    }
}

#[test]
fn quadratic_toy_loss() {
    let params = ModelParams::init(hyper(), 9).unwrap();
    let sq = |p: &ModelParams| {
        p.tensors()
            .iter()
            .flat_map(|(_, t)| t.data().to_vec())
            .map(|x| x * x)
            .sum::<f64>()
    };
    let grad = finite_diff_gradient(sq, &params, 1e-5);
    for ((_, g), (_, p)) in grad.tensors().iter().zip(params.tensors()) {
        for (gi, pi) in g.data().iter().zip(p.data()) {
            assert!((gi - 2.0 * pi).abs() < 1e-8);
        }
    }
}

#[test]
fn central_difference_error_is_second_order() {
    let params = ModelParams::init(hyper(), 2).unwrap();
    // A smooth loss with a non-zero third derivative.
    let cube = |p: &ModelParams| {
        p.estimator.layers[0]
            .bias
            .data()
            .iter()
            .map(|x| (x + 0.5).powi(3))
            .sum::<f64>()
    };
    let exact: Vec<f64> = params.estimator.layers[0]
        .bias
        .data()
        .iter()
        .map(|x| 3.0 * (x + 0.5) * (x + 0.5))
        .collect();
    let err = |step: f64| {
        let g = finite_diff_gradient(cube, &params, step);
        g.estimator.layers[0]
            .bias
            .data()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1e-2), err(5e-3));
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}
