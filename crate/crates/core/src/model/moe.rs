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

//! Sparse mixture-of-experts distribution layer.
//!
//! The gate's softmax weights `α` are computed over all experts; only the `k`
//! largest (ties to the lower index) are evaluated and summed with their
//! original, un-renormalized weights. Gradients flow through the selected
//! experts and their `α_i` only.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::layers::{Mlp, MlpCache};
use crate::tensor::{axpy, dot, softmax, softmax_backward, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum Moe {
    Sparse {
        experts: Vec<Mlp>,
        gate: Mlp,
        k: usize,
    },
    /// A single MLP in place of the expert layer.
    Dense(Mlp),
}

/// Result of one MoE evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MoeOutput {
    pub output: Vec<f64>,
    /// Gate weights over all experts (empty for the dense variant).
    pub alpha: Vec<f64>,
    /// Activated experts, by decreasing weight.
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MoeCache {
    alpha: Vec<f64>,
    selected: Vec<usize>,
    gate: Option<MlpCache>,
    experts: Vec<(Vec<f64>, MlpCache)>,
}

/// Indices of the `k` largest weights, ties broken by lower index.
pub fn top_k(alpha: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
    order.truncate(k.min(alpha.len()));
    order
}

impl Moe {
    #[allow(clippy::too_many_arguments)]
    pub fn init<R: Rng + ?Sized>(
        sparse: bool,
        d: usize,
        h: usize,
        m: usize,
        k: usize,
        expert_hidden: &[usize],
        gate_hidden: &[usize],
        rng: &mut R,
    ) -> Self {
        if sparse {
            let experts = (0..m)
                .map(|_| Mlp::init(d, expert_hidden, h, rng))
                .collect();
            let gate = Mlp::init(d, gate_hidden, m, rng);
            Moe::Sparse { experts, gate, k }
        } else {
            Moe::Dense(Mlp::init(d, expert_hidden, h, rng))
        }
    }

    /// Same architecture, all parameters zero.
    pub fn zeros_like(&self) -> Self {
        let z = |mlp: &Mlp| {
            let hidden: Vec<usize> = mlp.layers[1..].iter().map(|l| l.input_dim()).collect();
            Mlp::zeros(mlp.input_dim(), &hidden, mlp.output_dim())
        };
        match self {
            Moe::Sparse { experts, gate, k } => Moe::Sparse {
                experts: experts.iter().map(z).collect(),
                gate: z(gate),
                k: *k,
            },
            Moe::Dense(mlp) => Moe::Dense(z(mlp)),
        }
    }

    pub fn forward(&self, x: &[f64]) -> MoeOutput {
        match self {
            Moe::Sparse { experts, gate, k } => {
                let alpha = softmax(&gate.forward(x));
                let selected = top_k(&alpha, *k);
                let mut output = vec![0.0; experts[0].output_dim()];
                for &i in &selected {
                    axpy(alpha[i], &experts[i].forward(x), &mut output);
                }
                MoeOutput {
                    output,
                    alpha,
                    selected,
                }
            }
            Moe::Dense(mlp) => MoeOutput {
                output: mlp.forward(x),
                alpha: Vec::new(),
                selected: Vec::new(),
            },
        }
    }

    pub fn forward_cached(&self, x: &[f64]) -> (Vec<f64>, MoeCache) {
        match self {
            Moe::Sparse { experts, gate, k } => {
                let (logits, gate_cache) = gate.forward_cached(x);
                let alpha = softmax(&logits);
                let selected = top_k(&alpha, *k);
                let mut output = vec![0.0; experts[0].output_dim()];
                let mut cached = Vec::with_capacity(selected.len());
                for &i in &selected {
                    let (y, c) = experts[i].forward_cached(x);
                    axpy(alpha[i], &y, &mut output);
                    cached.push((y, c));
                }
                (
                    output,
                    MoeCache {
                        alpha,
                        selected,
                        gate: Some(gate_cache),
                        experts: cached,
                    },
                )
            }
            Moe::Dense(mlp) => {
                let (y, c) = mlp.forward_cached(x);
                (
                    y.clone(),
                    MoeCache {
                        alpha: Vec::new(),
                        selected: Vec::new(),
                        gate: None,
                        experts: vec![(y, c)],
                    },
                )
            }
        }
    }

    /// Accumulates gradients into `grad` (shaped like `self`).
    pub fn backward(
        &self,
        cache: &MoeCache,
        dout: &[f64],
        grad: &mut Moe,
        want_dx: bool,
    ) -> Option<Vec<f64>> {
        match (self, grad) {
            (
                Moe::Sparse { experts, gate, .. },
                Moe::Sparse {
                    experts: g_experts,
                    gate: g_gate,
                    ..
                },
            ) => {
                let mut dalpha = vec![0.0; cache.alpha.len()];
                let mut dx: Option<Vec<f64>> = None;
                let add = |dx: &mut Option<Vec<f64>>, part: Option<Vec<f64>>| {
                    if let Some(p) = part {
                        match dx {
                            Some(acc) => axpy(1.0, &p, acc),
                            None => *dx = Some(p),
                        }
                    }
                };
                for (&i, (y, c)) in cache.selected.iter().zip(&cache.experts) {
                    dalpha[i] = dot(dout, y);
                    let dy: Vec<f64> = dout.iter().map(|g| cache.alpha[i] * g).collect();
                    let part = experts[i].backward(c, &dy, &mut g_experts[i], want_dx);
                    add(&mut dx, part);
                }
                let dlogits = softmax_backward(&cache.alpha, &dalpha);
                let part = gate.backward(
                    cache.gate.as_ref().expect("sparse cache has a gate"),
                    &dlogits,
                    g_gate,
                    want_dx,
                );
                add(&mut dx, part);
                dx
            }
            (Moe::Dense(mlp), Moe::Dense(g)) => mlp.backward(&cache.experts[0].1, dout, g, want_dx),
            _ => panic!("gradient buffer does not match the MoE variant"),
        }
    }

    pub fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Matrix)>) {
        match self {
            Moe::Sparse { experts, gate, .. } => {
                for (i, e) in experts.iter().enumerate() {
                    e.tensors(&alloc::format!("{prefix}.expert{i}"), out);
                }
                gate.tensors(&alloc::format!("{prefix}.gate"), out);
            }
            Moe::Dense(mlp) => mlp.tensors(&alloc::format!("{prefix}.mlp"), out),
        }
    }

    pub fn tensors_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Matrix>) {
        match self {
            Moe::Sparse { experts, gate, .. } => {
                for e in experts {
                    e.tensors_mut(out);
                }
                gate.tensors_mut(out);
            }
            Moe::Dense(mlp) => mlp.tensors_mut(out),
        }
    }
}
