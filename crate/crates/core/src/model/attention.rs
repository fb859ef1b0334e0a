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

//! Multi-head self-attention over the embeddings of a query's predicate
//! columns. No residual connection and no normalization: `X' = [head_1 … head_H]·W_O`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::tensor::{softmax, softmax_backward, Matrix};

/// Projections `W_Q`, `W_K`, `W_V`, `W_O`, each `d × d`. Head `i` uses
/// columns `i·d/H .. (i+1)·d/H` of the first three.
#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    pub heads: usize,
    pub query: Matrix,
    pub key: Matrix,
    pub value: Matrix,
    pub output: Matrix,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    x: Matrix,
    q: Matrix,
    k: Matrix,
    v: Matrix,
    /// Row-softmaxed scores per head, `n × n`.
    probs: Vec<Matrix>,
    concat: Matrix,
}

impl Attention {
    pub fn init<R: Rng + ?Sized>(d: usize, heads: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(d as f64);
        let mut m = || {
            Matrix::from_vec(
                d,
                d,
                (0..d * d).map(|_| rng.gen_range(-bound..=bound)).collect(),
            )
        };
        let query = m();
        let key = m();
        let value = m();
        let output = m();
        Attention {
            heads,
            query,
            key,
            value,
            output,
        }
    }

    pub fn zeros(d: usize, heads: usize) -> Self {
        Attention {
            heads,
            query: Matrix::zeros(d, d),
            key: Matrix::zeros(d, d),
            value: Matrix::zeros(d, d),
            output: Matrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.query.rows()
    }

    fn head_dim(&self) -> usize {
        self.dim() / self.heads
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Matrix) -> (Matrix, AttentionCache) {
        let n = x.rows();
        let dh = self.head_dim();
        let scale = 1.0 / libm::sqrt(dh as f64);
        let q = x.matmul(&self.query);
        let k = x.matmul(&self.key);
        let v = x.matmul(&self.value);
        let mut concat = Matrix::zeros(n, self.dim());
        let mut probs = Vec::with_capacity(self.heads);
        for head in 0..self.heads {
            let cols = head * dh..(head + 1) * dh;
            let mut p = Matrix::zeros(n, n);
            for i in 0..n {
                let scores: Vec<f64> = (0..n)
                    .map(|j| {
                        let qi = &q.row(i)[cols.clone()];
                        let kj = &k.row(j)[cols.clone()];
                        qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() * scale
                    })
                    .collect();
                p.row_mut(i).copy_from_slice(&softmax(&scores));
            }
            for i in 0..n {
                for j in 0..n {
                    let w = p.get(i, j);
                    let vj = &v.row(j)[cols.clone()];
                    for (o, &vv) in concat.row_mut(i)[cols.clone()].iter_mut().zip(vj) {
                        *o += w * vv;
                    }
                }
            }
            probs.push(p);
        }
        let out = concat.matmul(&self.output);
        (
            out,
            AttentionCache {
                x: x.clone(),
                q,
                k,
                v,
                probs,
                concat,
            },
        )
    }

    /// Accumulates projection gradients given `dL/dX'`; returns `dL/dX`.
    pub fn backward(&self, cache: &AttentionCache, dout: &Matrix, grad: &mut Attention) -> Matrix {
        let n = cache.x.rows();
        let dh = self.head_dim();
        let scale = 1.0 / libm::sqrt(dh as f64);

        grad.output.add_assign(&cache.concat.t_matmul(dout));
        let dconcat = dout.matmul_t(&self.output);

        let mut dq = Matrix::zeros(n, self.dim());
        let mut dk = Matrix::zeros(n, self.dim());
        let mut dv = Matrix::zeros(n, self.dim());
        for head in 0..self.heads {
            let cols = head * dh..(head + 1) * dh;
            let p = &cache.probs[head];
            for i in 0..n {
                let dci = &dconcat.row(i)[cols.clone()];
                // dP[i][j] = dO_i · V_j ; dV_j += P[i][j] · dO_i
                let dp: Vec<f64> = (0..n)
                    .map(|j| {
                        dci.iter()
                            .zip(&cache.v.row(j)[cols.clone()])
                            .map(|(a, b)| a * b)
                            .sum()
                    })
                    .collect();
                for j in 0..n {
                    let w = p.get(i, j);
                    for (g, &d) in dv.row_mut(j)[cols.clone()].iter_mut().zip(dci) {
                        *g += w * d;
                    }
                }
                let ds = softmax_backward(p.row(i), &dp);
                for (j, &s) in ds.iter().enumerate() {
                    let s = s * scale;
                    if s == 0.0 {
                        continue;
                    }
                    for c in cols.clone() {
                        let dqi = dq.get(i, c) + s * cache.k.get(j, c);
                        dq.set(i, c, dqi);
                        let dkj = dk.get(j, c) + s * cache.q.get(i, c);
                        dk.set(j, c, dkj);
                    }
                }
            }
        }
        grad.query.add_assign(&cache.x.t_matmul(&dq));
        grad.key.add_assign(&cache.x.t_matmul(&dk));
        grad.value.add_assign(&cache.x.t_matmul(&dv));

        let mut dx = dq.matmul_t(&self.query);
        dx.add_assign(&dk.matmul_t(&self.key));
        dx.add_assign(&dv.matmul_t(&self.value));
        dx
    }

    pub fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Matrix)>) {
        out.push((alloc::format!("{prefix}.query"), &self.query));
        out.push((alloc::format!("{prefix}.key"), &self.key));
        out.push((alloc::format!("{prefix}.value"), &self.value));
        out.push((alloc::format!("{prefix}.output"), &self.output));
    }

    pub fn tensors_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Matrix>) {
        out.push(&mut self.query);
        out.push(&mut self.key);
        out.push(&mut self.value);
        out.push(&mut self.output);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_row_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let att = Attention::init(8, 2, &mut rng);
        let x = Matrix::from_rows(&[vec![0.1, -0.3, 0.5, 0.7, -0.2, 0.0, 0.9, -1.0]]);
        let out = att.forward(&x);
        let expected = x.matmul(&att.value).matmul(&att.output);
        for (a, b) in out.data().iter().zip(expected.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn row_permutation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let att = Attention::init(8, 2, &mut rng);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows);
        let perm = [2, 0, 1];
        let xp = Matrix::from_rows(&perm.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
        let out = att.forward(&x);
        let outp = att.forward(&xp);
        for (r, &i) in perm.iter().enumerate() {
            for (a, b) in outp.row(r).iter().zip(out.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
