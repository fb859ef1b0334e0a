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

//! Joint training of the distribution head and the cardinality estimator.
//!
//! The objective per batch is `L_dist + β·L_card`: the mean KL divergence of
//! predicted against ground-truth column distributions plus the mean squared
//! error of the predicted log cardinality. With the distribution head
//! disabled it is `L_card` alone.

mod workload;

pub use workload::{
    generate_anchored_queries, generate_queries, GenerationConfig, ATTEMPTS_PER_QUERY,
};

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::QueryFeatures;
use crate::model::{kl_divergence, HyperParams, LossWeights, ModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Weight of the cardinality loss.
    pub beta: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Seed of the per-epoch shuffles.
    pub seed: u64,
    /// Smoothing of ground-truth distributions inside the KL term.
    pub smoothing: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta: 0.1,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 256,
            epochs: 20,
            seed: 0,
            smoothing: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidConfig("beta must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// `D_KL(π̂ ‖ π_s)` with the smoothed ground truth.
pub fn kl_loss(predicted: &[f64], target: &[f64], smoothing: f64) -> Result<f64> {
    kl_divergence(predicted, target, smoothing)
}

/// `(ŷ − ln card)²` on the unclamped prediction.
pub fn card_loss(log_card: f64, true_card: u64) -> Result<f64> {
    if true_card < 1 {
        return Err(Error::InvalidCard(true_card));
    }
    let e = log_card - libm::log(true_card as f64);
    Ok(e * e)
}

/// The three loss figures of a batch or epoch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub dist: f64,
    pub card: f64,
}

impl LossParts {
    pub fn combine(dist: f64, card: f64, beta: f64, use_dist: bool) -> Self {
        let total = if use_dist { dist + beta * card } else { card };
        LossParts { total, dist, card }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.dist.is_finite() && self.card.is_finite()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct LossSums {
    kl: f64,
    columns: usize,
    sq: f64,
    queries: usize,
}

impl LossSums {
    fn parts(&self, beta: f64, use_dist: bool) -> LossParts {
        let dist = if use_dist && self.columns > 0 {
            self.kl / self.columns as f64
        } else {
            0.0
        };
        let card = if self.queries > 0 {
            self.sq / self.queries as f64
        } else {
            0.0
        };
        LossParts::combine(dist, card, beta, use_dist)
    }

    fn add(&mut self, other: LossSums) {
        self.kl += other.kl;
        self.columns += other.columns;
        self.sq += other.sq;
        self.queries += other.queries;
    }
}

fn batch_sums(
    model: &ModelParams,
    batch: &[&QueryFeatures],
    cfg: &TrainConfig,
    mut grad: Option<&mut ModelParams>,
) -> Result<LossSums> {
    let use_dist = model.hyper.use_dist;
    let columns: usize = batch.iter().map(|q| q.columns.len()).sum();
    let weights = LossWeights {
        dist: if use_dist {
            1.0 / columns.max(1) as f64
        } else {
            0.0
        },
        card: if use_dist { cfg.beta } else { 1.0 } / batch.len().max(1) as f64,
        smoothing: cfg.smoothing,
    };
    let mut sums = LossSums {
        columns,
        queries: batch.len(),
        ..LossSums::default()
    };
    for q in batch {
        let fwd = model.forward(q, use_dist)?;
        let (kl, sq) = model.loss_terms(q, &fwd, cfg.smoothing)?;
        sums.kl += kl;
        sums.sq += sq;
        if let Some(g) = grad.as_deref_mut() {
            model.backward(q, &fwd, weights, g)?;
        }
    }
    Ok(sums)
}

/// Loss of a batch: `(total, L_dist, L_card)`.
pub fn composite_loss(
    model: &ModelParams,
    batch: &[QueryFeatures],
    cfg: &TrainConfig,
) -> Result<LossParts> {
    let refs: Vec<&QueryFeatures> = batch.iter().collect();
    Ok(batch_sums(model, &refs, cfg, None)?.parts(cfg.beta, model.hyper.use_dist))
}

/// Loss of a batch together with its gradient, accumulated into `grad`.
pub fn composite_gradient(
    model: &ModelParams,
    batch: &[&QueryFeatures],
    cfg: &TrainConfig,
    grad: &mut ModelParams,
) -> Result<LossParts> {
    Ok(batch_sums(model, batch, cfg, Some(grad))?.parts(cfg.beta, model.hyper.use_dist))
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    first: ModelParams,
    second: ModelParams,
}

impl Adam {
    pub fn new(params: &ModelParams, cfg: &TrainConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            epsilon: cfg.adam_epsilon,
            step: 0,
            first: params.zeros_like(),
            second: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grad: &ModelParams) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let grads = grad.tensors();
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(self.first.tensors_mut())
            .zip(self.second.tensors_mut());
        for (((p, m), v), (_, g)) in tensors.zip(grads) {
            let iter = p
                .data_mut()
                .iter_mut()
                .zip(m.data_mut())
                .zip(v.data_mut())
                .zip(g.data());
            for (((p, m), v), &g) in iter {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= self.lr * m_hat / (libm::sqrt(v_hat) + self.epsilon);
            }
        }
    }
}

/// Parameters after training plus per-epoch losses.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<LossParts>,
}

/// Initializes parameters from `init_seed` and trains them.
pub fn train(
    corpus: &[QueryFeatures],
    hyper: HyperParams,
    cfg: &TrainConfig,
    init_seed: u64,
) -> Result<TrainOutcome> {
    let params = ModelParams::init(hyper, init_seed)?;
    train_from(params, corpus, cfg)
}

/// Minibatch Adam over seeded per-epoch shuffles of `corpus`.
pub fn train_from(
    mut params: ModelParams,
    corpus: &[QueryFeatures],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for q in corpus {
        match q.true_card {
            Some(c) if c >= 1 => {}
            other => return Err(Error::InvalidCard(other.unwrap_or(0))),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(&params, cfg);
    let mut grad = params.zeros_like();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch_index = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch = LossSums::default();
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&QueryFeatures> = chunk.iter().map(|&i| &corpus[i]).collect();
            grad.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
            let sums = batch_sums(&params, &batch, cfg, Some(&mut grad))?;
            if !sums.parts(cfg.beta, params.hyper.use_dist).is_finite() || !grad.all_finite() {
                return Err(Error::NonFiniteLoss { batch: batch_index });
            }
            adam.step(&mut params, &grad);
            epoch.add(sums);
            batch_index += 1;
        }
        history.push(epoch.parts(cfg.beta, params.hyper.use_dist));
    }
    Ok(TrainOutcome { params, history })
}

/// Central-difference gradient of `loss_at` with respect to every parameter.
pub fn finite_diff_gradient<F>(mut loss_at: F, params: &ModelParams, step: f64) -> ModelParams
where
    F: FnMut(&ModelParams) -> f64,
{
    let mut work = params.clone();
    let mut grad = params.zeros_like();
    let sizes: Vec<usize> = params
        .tensors()
        .iter()
        .map(|(_, t)| t.data().len())
        .collect();
    for (t, &size) in sizes.iter().enumerate() {
        for e in 0..size {
            let original = work.tensors_mut()[t].data()[e];
            work.tensors_mut()[t].data_mut()[e] = original + step;
            let plus = loss_at(&work);
            work.tensors_mut()[t].data_mut()[e] = original - step;
            let minus = loss_at(&work);
            work.tensors_mut()[t].data_mut()[e] = original;
            grad.tensors_mut()[t].data_mut()[e] = (plus - minus) / (2.0 * step);
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn card_loss_values() {
        assert_eq!(card_loss(libm::log(40.0), 40).unwrap(), 0.0);
        let ten = card_loss(libm::log(10.0 * 40.0), 40).unwrap();
        assert!((ten - 5.301898110478399).abs() < 1e-12);
        let under = card_loss(libm::log(40.0 / 10.0), 40).unwrap();
        assert!((ten - under).abs() < 1e-12);
        assert_eq!(card_loss(0.0, 0), Err(Error::InvalidCard(0)));
    }

    #[test]
    fn kl_uniform_against_smoothed_one_hot() {
        let eps = 1e-6;
        let e2 = eps / (1.0 + 2.0 * eps);
        let big = (1.0 + eps) / (1.0 + 2.0 * eps);
        let expected = 0.5 * libm::log(0.5 / big) + 0.5 * libm::log(0.5 / e2);
        let kl = kl_loss(&[0.5, 0.5], &[1.0, 0.0], eps).unwrap();
        assert!((kl - expected).abs() < 1e-12);
        assert!((kl - 6.2146).abs() < 1e-3, "{kl}");
    }

    #[test]
    fn composite_arithmetic() {
        let p = LossParts::combine(1.0, 5.0, 0.1, true);
        assert!((p.total - 1.5).abs() < 1e-15);
        assert_eq!(LossParts::combine(1.0, 5.0, 0.0, true).total, 1.0);
        assert_eq!(LossParts::combine(1.0, 5.0, 0.1, false).total, 5.0);
    }
}
