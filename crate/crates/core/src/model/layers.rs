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

//! Fully connected layers with ReLU hidden activations.

use alloc::vec::Vec;

use rand::Rng;

use crate::tensor::{axpy, dot, Matrix};

/// `y = x·W + b` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Dense {
    /// Uniform in `±1/sqrt(fan_in)` for weights and biases.
    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(input.max(1) as f64);
        let mut sample = |n: usize| {
            (0..n)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect::<Vec<_>>()
        };
        let weight = Matrix::from_vec(input, output, sample(input * output));
        let bias = Matrix::from_vec(1, output, sample(output));
        Dense { weight, bias }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Dense {
            weight: Matrix::zeros(input, output),
            bias: Matrix::zeros(1, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim());
        let mut y = self.bias.data().to_vec();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.weight.row(i), &mut y);
            }
        }
        y
    }

    /// Accumulates parameter gradients into `grad`; returns `dL/dx` when asked.
    pub fn backward(
        &self,
        x: &[f64],
        dy: &[f64],
        grad: &mut Dense,
        want_dx: bool,
    ) -> Option<Vec<f64>> {
        axpy(1.0, dy, grad.bias.data_mut());
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, dy, grad.weight.row_mut(i));
            }
        }
        want_dx.then(|| {
            (0..self.input_dim())
                .map(|i| dot(self.weight.row(i), dy))
                .collect()
        })
    }
}

/// Multi-layer perceptron: ReLU between layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations saved by [`Mlp::forward_cached`]: the input of every layer.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input);
        dims.extend_from_slice(hidden);
        dims.push(output);
        dims
    }

    pub fn init<R: Rng + ?Sized>(
        input: usize,
        hidden: &[usize],
        output: usize,
        rng: &mut R,
    ) -> Self {
        let dims = Self::dims(input, hidden, output);
        Mlp {
            layers: dims
                .windows(2)
                .map(|w| Dense::init(w[0], w[1], rng))
                .collect(),
        }
    }

    pub fn zeros(input: usize, hidden: &[usize], output: usize) -> Self {
        let dims = Self::dims(input, hidden, output);
        Mlp {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(&h);
            if i < last {
                relu_in_place(&mut h);
            }
        }
        h
    }

    pub fn forward_cached(&self, x: &[f64]) -> (Vec<f64>, MlpCache) {
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = layer.forward(&h);
            if i < last {
                relu_in_place(&mut next);
            }
            inputs.push(h);
            h = next;
        }
        (h, MlpCache { inputs })
    }

    /// Backpropagates `dy` through the cached pass, accumulating into `grad`.
    pub fn backward(
        &self,
        cache: &MlpCache,
        dy: &[f64],
        grad: &mut Mlp,
        want_dx: bool,
    ) -> Option<Vec<f64>> {
        let mut d = dy.to_vec();
        for i in (0..self.layers.len()).rev() {
            let need = want_dx || i > 0;
            let dx = self.layers[i].backward(&cache.inputs[i], &d, &mut grad.layers[i], need);
            match dx {
                Some(mut dx) if i > 0 => {
                    // ReLU gate: the cached input of layer i is the activated output of i-1.
                    for (g, &a) in dx.iter_mut().zip(&cache.inputs[i]) {
                        if a <= 0.0 {
                            *g = 0.0;
                        }
                    }
                    d = dx;
                }
                other => return other,
            }
        }
        None
    }

    pub fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(alloc::string::String, &'a Matrix)>) {
        for (i, layer) in self.layers.iter().enumerate() {
            out.push((alloc::format!("{prefix}.layer{i}.weight"), &layer.weight));
            out.push((alloc::format!("{prefix}.layer{i}.bias"), &layer.bias));
        }
    }

    pub fn tensors_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Matrix>) {
        for layer in &mut self.layers {
            out.push(&mut layer.weight);
            out.push(&mut layer.bias);
        }
    }
}

#[inline]
fn relu_in_place(v: &mut [f64]) {
    v.iter_mut().for_each(|x| {
        if *x < 0.0 {
            *x = 0.0
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cached_forward_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = Mlp::init(5, &[7, 4], 3, &mut rng);
        let x = [0.3, -1.0, 0.5, 2.0, -0.2];
        let (y, _) = mlp.forward_cached(&x);
        assert_eq!(y, mlp.forward(&x));
        assert_eq!(y.len(), 3);
    }

    #[test]
    fn input_gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mlp = Mlp::init(4, &[6], 2, &mut rng);
        let x = vec![0.7, -0.4, 1.1, 0.2];
        let w = [1.0, -2.0];
        let f = |x: &[f64]| dot(&mlp.forward(x), &w);
        let (_, cache) = mlp.forward_cached(&x);
        let mut grad = Mlp::zeros(4, &[6], 2);
        let dx = mlp.backward(&cache, &w, &mut grad, true).unwrap();
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (f(&xp) - f(&xm)) / 2e-6;
            assert!((fd - dx[i]).abs() < 1e-6, "{i}: {fd} vs {}", dx[i]);
        }
    }
}
