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

//! The semantic cardinality estimator.
//!
//! Per query: column embeddings pass through multi-head self-attention for
//! cross-column context; a mixture-of-experts layer maps both the raw and the
//! contextual embedding of every column to latent distributions whose sum is
//! softmaxed into a predicted distribution `π̂`; `[p_i ‖ x'_i]` vectors are
//! max-pooled over the predicates and, with `ln N` appended, fed to an MLP
//! predicting `ln Card`.

mod attention;
mod layers;
mod moe;

pub use attention::{Attention, AttentionCache};
pub use layers::{Dense, Mlp, MlpCache};
pub use moe::{top_k, Moe, MoeCache, MoeOutput};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::QueryFeatures;
use crate::tensor::{axpy, dot, softmax, softmax_backward, Matrix};
use crate::{Error, Result};

/// Architecture switches removed one at a time in ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// A plain MLP instead of the expert layer.
    NoMoe,
    /// Raw embeddings instead of attention outputs; no attention at all.
    NoCorrelation,
    /// No distribution head and no distribution loss.
    NoDist,
}

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::NoMoe => "no-moe",
            Ablation::NoCorrelation => "no-correlation",
            Ablation::NoDist => "no-dist",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    /// Embedding width.
    pub d: usize,
    /// Distribution and predicate vector width.
    pub h: usize,
    /// Number of experts.
    pub m: usize,
    /// Experts activated per input.
    pub k: usize,
    /// Attention heads.
    pub heads: usize,
    /// Maximum predicate columns per query.
    pub max_predicates: usize,
    pub expert_hidden: Vec<usize>,
    pub gate_hidden: Vec<usize>,
    pub est_hidden: Vec<usize>,
    pub use_moe: bool,
    pub use_correlation: bool,
    pub use_dist: bool,
    /// Local and global distribution paths share one expert layer.
    pub share_moe: bool,
    /// Append `p_i · π̂_i` to every predicate feature before pooling.
    pub dist_feature: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            d: crate::semantics::DEFAULT_DIM,
            h: 100,
            m: 4,
            k: 2,
            heads: 4,
            max_predicates: 8,
            expert_hidden: vec![256],
            gate_hidden: vec![64],
            est_hidden: vec![512, 256],
            use_moe: true,
            use_correlation: true,
            use_dist: true,
            share_moe: true,
            dist_feature: false,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.d == 0 || self.h == 0 {
            return fail("d and h must be positive");
        }
        if self.k == 0 || self.k > self.m {
            return fail("need 1 <= k <= m");
        }
        if self.heads == 0 || self.d % self.heads != 0 {
            return fail("d must be divisible by the head count");
        }
        if self.max_predicates == 0 {
            return fail("max_predicates must be at least 1");
        }
        Ok(())
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        match ablation {
            Ablation::NoMoe => self.use_moe = false,
            Ablation::NoCorrelation => self.use_correlation = false,
            Ablation::NoDist => self.use_dist = false,
        }
        self
    }

    /// Width of a pooled predicate feature.
    pub fn feature_dim(&self) -> usize {
        self.h + self.d + usize::from(self.use_dist && self.dist_feature)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hyper: HyperParams,
    /// Distribution layer for the raw embedding (and the contextual one when shared).
    pub local: Option<Moe>,
    /// Separate layer for the contextual embedding when `share_moe` is off.
    pub global: Option<Moe>,
    pub attention: Option<Attention>,
    pub estimator: Mlp,
}

/// Scalar weights turning per-query terms into the batch loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// Multiplies each column's KL term (`1 / columns in batch`).
    pub dist: f64,
    /// Multiplies each query's squared log error (`β / batch size`).
    pub card: f64,
    /// Smoothing added to ground-truth distributions.
    pub smoothing: f64,
}

/// Forward results of one query.
#[derive(Debug, Clone)]
pub struct QueryForward {
    /// Predicted `ln Card`, before clamping.
    pub log_card: f64,
    /// `π̂` per predicate column; empty when the distribution head did not run.
    pub predicted: Vec<Vec<f64>>,
    cache: ForwardCache,
}

#[derive(Debug, Clone)]
struct ForwardCache {
    attention: Option<AttentionCache>,
    dist: Vec<(MoeCache, MoeCache)>,
    argmax: Vec<usize>,
    estimator: MlpCache,
}

/// Smoothed target `(π + ε) / (1 + h·ε)`.
pub fn smooth_distribution(pi: &[f64], eps: f64) -> Vec<f64> {
    let denom = 1.0 + pi.len() as f64 * eps;
    pi.iter().map(|p| (p + eps) / denom).collect()
}

/// `Σ π̂ ln(π̂ / π_s)`, i.e. `D_KL(π̂ ‖ π_s)` against the smoothed target.
pub fn kl_divergence(predicted: &[f64], target: &[f64], eps: f64) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "distribution lengths {} and {}",
            predicted.len(),
            target.len()
        )));
    }
    let smoothed = smooth_distribution(target, eps);
    Ok(predicted
        .iter()
        .zip(&smoothed)
        .filter(|(q, _)| **q > 0.0)
        .map(|(q, p)| q * libm::log(q / p))
        .sum())
}

impl ModelParams {
    /// Fresh parameters, uniform in `±1/sqrt(fan_in)`, from a seeded stream.
    pub fn init(hyper: HyperParams, seed: u64) -> Result<Self> {
        hyper.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = &hyper;
        let moe = |rng: &mut ChaCha8Rng| {
            Moe::init(
                hp.use_moe,
                hp.d,
                hp.h,
                hp.m,
                hp.k,
                &hp.expert_hidden,
                &hp.gate_hidden,
                rng,
            )
        };
        let local = hp.use_dist.then(|| moe(&mut rng));
        let global = (hp.use_dist && !hp.share_moe).then(|| moe(&mut rng));
        let attention = hp
            .use_correlation
            .then(|| Attention::init(hp.d, hp.heads, &mut rng));
        let estimator = Mlp::init(hp.feature_dim() + 1, &hp.est_hidden, 1, &mut rng);
        Ok(ModelParams {
            hyper,
            local,
            global,
            attention,
            estimator,
        })
    }

    /// Same shapes, all zeros; used as a gradient or optimizer-moment buffer.
    pub fn zeros_like(&self) -> Self {
        let hp = &self.hyper;
        let est_hidden: Vec<usize> = self.estimator.layers[1..]
            .iter()
            .map(Dense::input_dim)
            .collect();
        ModelParams {
            hyper: hp.clone(),
            local: self.local.as_ref().map(Moe::zeros_like),
            global: self.global.as_ref().map(Moe::zeros_like),
            attention: self
                .attention
                .as_ref()
                .map(|a| Attention::zeros(a.dim(), a.heads)),
            estimator: Mlp::zeros(self.estimator.input_dim(), &est_hidden, 1),
        }
    }

    /// Every tensor with its stable name, in serialization order.
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::new();
        if let Some(m) = &self.local {
            m.tensors("moe_local", &mut out);
        }
        if let Some(m) = &self.global {
            m.tensors("moe_global", &mut out);
        }
        if let Some(a) = &self.attention {
            a.tensors("attention", &mut out);
        }
        self.estimator.tensors("estimator", &mut out);
        out
    }

    /// Mutable tensors in the same order as [`ModelParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        if let Some(m) = &mut self.local {
            m.tensors_mut(&mut out);
        }
        if let Some(m) = &mut self.global {
            m.tensors_mut(&mut out);
        }
        if let Some(a) = &mut self.attention {
            a.tensors_mut(&mut out);
        }
        self.estimator.tensors_mut(&mut out);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.data().len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.all_finite())
    }

    fn check_width(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got == want {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(alloc::format!(
                "{what} has width {got}, expected {want}"
            )))
        }
    }

    /// Cross-column context `X'` of the stacked embeddings (identity without attention).
    pub fn mhsa_forward(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width("embedding matrix", x.cols(), self.hyper.d)?;
        if x.rows() == 0 || x.rows() > self.hyper.max_predicates {
            return Err(Error::ShapeMismatch(alloc::format!(
                "attention over {} rows, allowed 1..={}",
                x.rows(),
                self.hyper.max_predicates
            )));
        }
        Ok(match &self.attention {
            Some(a) => a.forward(x),
            None => x.clone(),
        })
    }

    /// Expert layer applied to one embedding.
    pub fn moe_forward(&self, x: &[f64]) -> Result<MoeOutput> {
        self.check_width("embedding", x.len(), self.hyper.d)?;
        let moe = self
            .local
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("distribution head is disabled".into()))?;
        Ok(moe.forward(x))
    }

    /// `π̂ = softmax(MoE(x) + MoE(x'))`.
    pub fn predict_distribution(&self, x: &[f64], x_context: &[f64]) -> Result<Vec<f64>> {
        self.check_width("contextual embedding", x_context.len(), self.hyper.d)?;
        let local = self.moe_forward(x)?.output;
        let global = match &self.global {
            Some(g) => g.forward(x_context).output,
            None => self.moe_forward(x_context)?.output,
        };
        Ok(softmax(
            &local
                .iter()
                .zip(&global)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        ))
    }

    /// Masked max pooling of `p_i ‖ x'_i` over the real predicates.
    pub fn encode_query(&self, predicates: &[(&[f64], &[f64])]) -> Result<Vec<f64>> {
        self.check_predicate_count(predicates.len())?;
        let hp = &self.hyper;
        let mut pooled = vec![f64::NEG_INFINITY; hp.h + hp.d];
        for (p, x) in predicates {
            self.check_width("predicate vector", p.len(), hp.h)?;
            self.check_width("contextual embedding", x.len(), hp.d)?;
            for (slot, v) in pooled.iter_mut().zip(p.iter().chain(x.iter())) {
                *slot = slot.max(*v);
            }
        }
        Ok(pooled)
    }

    fn check_predicate_count(&self, n: usize) -> Result<()> {
        if n == 0 {
            Err(Error::EmptyQuery)
        } else if n > self.hyper.max_predicates {
            Err(Error::TooManyPredicates {
                got: n,
                max: self.hyper.max_predicates,
            })
        } else {
            Ok(())
        }
    }

    fn validate_features(&self, q: &QueryFeatures) -> Result<()> {
        self.check_predicate_count(q.columns.len())?;
        for c in &q.columns {
            self.check_width("embedding", c.embedding.len(), self.hyper.d)?;
            self.check_width("predicate vector", c.predicate.len(), self.hyper.h)?;
            if let Some(pi) = &c.distribution {
                self.check_width("distribution", pi.len(), self.hyper.h)?;
            }
        }
        if q.rows == 0 {
            return Err(Error::EmptyTable(String::new()));
        }
        Ok(())
    }

    /// Full forward pass. `with_dist` forces the distribution head to run even
    /// when the estimator does not consume it (needed for the loss).
    pub fn forward(&self, q: &QueryFeatures, with_dist: bool) -> Result<QueryForward> {
        self.validate_features(q)?;
        let hp = &self.hyper;
        let n = q.columns.len();
        let x = Matrix::from_rows(
            &q.columns
                .iter()
                .map(|c| c.embedding.clone())
                .collect::<Vec<_>>(),
        );
        let (context, attention) = match &self.attention {
            Some(a) => {
                let (o, c) = a.forward_cached(&x);
                (o, Some(c))
            }
            None => (x.clone(), None),
        };

        let run_dist = hp.use_dist && (with_dist || hp.dist_feature);
        let mut predicted = Vec::new();
        let mut dist = Vec::new();
        if run_dist {
            let local = self.local.as_ref().expect("use_dist implies a local layer");
            let global = self.global.as_ref().unwrap_or(local);
            for i in 0..n {
                let (dl, cl) = local.forward_cached(x.row(i));
                let (dg, cg) = global.forward_cached(context.row(i));
                let z: Vec<f64> = dl.iter().zip(&dg).map(|(a, b)| a + b).collect();
                predicted.push(softmax(&z));
                dist.push((cl, cg));
            }
        }

        let width = hp.feature_dim();
        let mut pooled = vec![f64::NEG_INFINITY; width];
        let mut argmax = vec![0usize; width];
        for i in 0..n {
            let p = &q.columns[i].predicate;
            let extra = (hp.use_dist && hp.dist_feature).then(|| dot(p, &predicted[i]));
            for (j, v) in p
                .iter()
                .chain(context.row(i))
                .chain(extra.iter())
                .enumerate()
            {
                if *v > pooled[j] {
                    pooled[j] = *v;
                    argmax[j] = i;
                }
            }
        }
        pooled.push(libm::log(q.rows as f64));
        let (out, estimator) = self.estimator.forward_cached(&pooled);
        Ok(QueryForward {
            log_card: out[0],
            predicted,
            cache: ForwardCache {
                attention,
                dist,
                argmax,
                estimator,
            },
        })
    }

    /// `ln Card` prediction before clamping.
    pub fn log_cardinality(&self, q: &QueryFeatures) -> Result<f64> {
        Ok(self.forward(q, false)?.log_card)
    }

    /// `clamp(exp(ŷ), 1, N)`; never zero.
    pub fn estimate_cardinality(&self, q: &QueryFeatures) -> Result<f64> {
        let y = self.log_cardinality(q)?;
        Ok(clamp_estimate(y, q.rows))
    }

    /// Loss terms of one query: `(Σ_columns KL, (ŷ − ln Card)²)`.
    pub fn loss_terms(
        &self,
        q: &QueryFeatures,
        fwd: &QueryForward,
        smoothing: f64,
    ) -> Result<(f64, f64)> {
        let card = q.true_card.ok_or(Error::InvalidCard(0))?;
        if card < 1 {
            return Err(Error::InvalidCard(card));
        }
        let err = fwd.log_card - libm::log(card as f64);
        let mut kl = 0.0;
        for (c, pred) in q.columns.iter().zip(&fwd.predicted) {
            let target = c.distribution.as_ref().ok_or_else(|| {
                Error::ShapeMismatch("training features lack a ground-truth distribution".into())
            })?;
            kl += kl_divergence(pred, target, smoothing)?;
        }
        Ok((kl, err * err))
    }

    /// Backpropagates the weighted loss of one query into `grad`.
    pub fn backward(
        &self,
        q: &QueryFeatures,
        fwd: &QueryForward,
        weights: LossWeights,
        grad: &mut ModelParams,
    ) -> Result<()> {
        let hp = &self.hyper;
        let card = q.true_card.ok_or(Error::InvalidCard(0))?;
        if card < 1 {
            return Err(Error::InvalidCard(card));
        }
        let n = q.columns.len();
        let cache = &fwd.cache;

        let dy = weights.card * 2.0 * (fwd.log_card - libm::log(card as f64));
        let din = self
            .estimator
            .backward(&cache.estimator, &[dy], &mut grad.estimator, true)
            .expect("input gradient requested");

        let mut dcontext = Matrix::zeros(n, hp.d);
        let mut dextra = vec![0.0; n];
        for (j, &i) in cache.argmax.iter().enumerate() {
            let g = din[j];
            if j < hp.h {
                continue;
            } else if j < hp.h + hp.d {
                let c = j - hp.h;
                dcontext.set(i, c, dcontext.get(i, c) + g);
            } else {
                dextra[i] += g;
            }
        }

        if !cache.dist.is_empty() {
            let local = self.local.as_ref().expect("use_dist implies a local layer");
            let want_dx = self.attention.is_some();
            for i in 0..n {
                let pred = &fwd.predicted[i];
                let mut dpred = vec![0.0; hp.h];
                if weights.dist != 0.0 {
                    if let Some(target) = &q.columns[i].distribution {
                        let smoothed = smooth_distribution(target, weights.smoothing);
                        for ((d, q), p) in dpred.iter_mut().zip(pred).zip(&smoothed) {
                            *d = weights.dist * (libm::log(q / p) + 1.0);
                        }
                    }
                }
                if dextra[i] != 0.0 {
                    axpy(dextra[i], &q.columns[i].predicate, &mut dpred);
                }
                let dz = softmax_backward(pred, &dpred);
                let (cl, cg) = &cache.dist[i];
                let g_local = grad.local.as_mut().expect("gradient buffer mirrors params");
                local.backward(cl, &dz, g_local, false);
                let dx = match (&self.global, &mut grad.global) {
                    (Some(global), Some(g_global)) => global.backward(cg, &dz, g_global, want_dx),
                    _ => local.backward(cg, &dz, g_local, want_dx),
                };
                if let Some(dx) = dx {
                    axpy(1.0, &dx, dcontext.row_mut(i));
                }
            }
        }

        if let (Some(att), Some(cache_att)) = (&self.attention, &cache.attention) {
            let g = grad
                .attention
                .as_mut()
                .expect("gradient buffer mirrors params");
            att.backward(cache_att, &dcontext, g);
        }
        Ok(())
    }
}

/// `clamp(exp(y), 1, N)`.
pub fn clamp_estimate(log_card: f64, rows: u64) -> f64 {
    let upper = (rows as f64).max(1.0);
    if log_card.is_nan() {
        return 1.0;
    }
    libm::exp(log_card).clamp(1.0, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::PredicateFeatures;
    use rand::Rng;

    pub(crate) fn small_hyper() -> HyperParams {
        HyperParams {
            d: 8,
            h: 6,
            m: 3,
            k: 2,
            heads: 2,
            max_predicates: 4,
            expert_hidden: vec![5],
            gate_hidden: vec![4],
            est_hidden: vec![7],
            ..HyperParams::default()
        }
    }

    fn random_query(hp: &HyperParams, n: usize, seed: u64) -> QueryFeatures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let columns = (0..n)
            .map(|_| PredicateFeatures {
                embedding: (0..hp.d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                predicate: (0..hp.h).map(|_| rng.gen_range(0.0..1.0)).collect(),
                distribution: None,
            })
            .collect();
        QueryFeatures {
            rows: 1000,
            columns,
            true_card: Some(17),
        }
    }

    #[test]
    fn predicted_distribution_is_positive_simplex() {
        let hp = small_hyper();
        let model = ModelParams::init(hp.clone(), 1).unwrap();
        let q = random_query(&hp, 3, 2);
        let fwd = model.forward(&q, true).unwrap();
        assert_eq!(fwd.predicted.len(), 3);
        for pi in &fwd.predicted {
            assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(pi.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn estimate_is_clamped() {
        assert_eq!(clamp_estimate(0.0, 50), 1.0);
        assert_eq!(clamp_estimate(libm::log(50.0) + 5.0, 50), 50.0);
        assert_eq!(clamp_estimate(-30.0, 50), 1.0);
        assert!((clamp_estimate(libm::log(7.0), 50) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn encode_single_and_pairwise_max() {
        let hp = HyperParams {
            d: 2,
            h: 2,
            heads: 1,
            ..small_hyper()
        };
        let model = ModelParams::init(hp, 1).unwrap();
        let (p1, x1) = ([1.0, 0.0], [-0.5, 0.25]);
        let (p2, x2) = ([0.0, 1.0], [-0.75, 0.5]);
        assert_eq!(
            model.encode_query(&[(&p1, &x1)]).unwrap(),
            vec![1.0, 0.0, -0.5, 0.25]
        );
        let both = model.encode_query(&[(&p1, &x1), (&p2, &x2)]).unwrap();
        assert_eq!(both, vec![1.0, 1.0, -0.5, 0.5]);
        assert_eq!(model.encode_query(&[(&p2, &x2), (&p1, &x1)]).unwrap(), both);
        assert_eq!(model.encode_query(&[]), Err(Error::EmptyQuery));
    }

    #[test]
    fn too_many_predicates() {
        let hp = small_hyper();
        let model = ModelParams::init(hp.clone(), 1).unwrap();
        let q = random_query(&hp, 5, 3);
        assert!(matches!(
            model.estimate_cardinality(&q),
            Err(Error::TooManyPredicates { got: 5, max: 4 })
        ));
    }

    #[test]
    fn kl_of_identical_smooth_distributions_is_zero() {
        let pi = [0.2, 0.3, 0.5];
        let smoothed = smooth_distribution(&pi, 1e-6);
        // KL against the smoothed target of `pi` is zero when predicted == smoothed.
        assert!(kl_divergence(&smoothed, &pi, 1e-6).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ablations_change_parameter_sets() {
        let full = ModelParams::init(small_hyper(), 1).unwrap();
        let no_dist = ModelParams::init(small_hyper().with_ablation(Ablation::NoDist), 1).unwrap();
        let no_corr =
            ModelParams::init(small_hyper().with_ablation(Ablation::NoCorrelation), 1).unwrap();
        let no_moe = ModelParams::init(small_hyper().with_ablation(Ablation::NoMoe), 1).unwrap();
        assert!(full.local.is_some() && full.attention.is_some());
        assert!(no_dist.local.is_none());
        assert!(no_corr.attention.is_none());
        assert!(matches!(no_moe.local, Some(Moe::Dense(_))));
        assert_eq!(full.tensors().len(), full.zeros_like().tensors().len());
    }
}
