use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::linalg::{dot, norm2};
use crate::rng::rng_from;

/// Largest dimension of a materialized symmetric 3-tensor.
pub const MAX_TENSOR_DIM: usize = 64;

/// Dense `k×k×k` tensor, entry `(i, j, l)` at `(i k + j) k + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor3 {
    k: usize,
    data: Vec<f64>,
}

impl SymTensor3 {
    pub fn zeros(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_TENSOR_DIM {
            return Err(CoresetError::Capacity {
                what: format!("dense {k}x{k}x{k} tensor"),
                requested: k as u128,
                budget: MAX_TENSOR_DIM as u128,
            });
        }
        Ok(SymTensor3 {
            k,
            data: vec![0.0; k * k * k],
        })
    }

    /// `sum_i lambda_i v_i^{⊗3}`.
    pub fn from_components(components: &[(f64, Vec<f64>)], k: usize) -> Result<Self> {
        let mut t = Self::zeros(k)?;
        for (lambda, v) in components {
            t.add_rank_one(*lambda, v);
        }
        Ok(t)
    }

    /// Build from a flat `k^3` array, rejecting asymmetric input.
    pub fn from_dense(k: usize, data: Vec<f64>, tol: f64) -> Result<Self> {
        let mut t = Self::zeros(k)?;
        if data.len() != k * k * k {
            return Err(CoresetError::DimensionMismatch {
                expected: k * k * k,
                got: data.len(),
            });
        }
        t.data = data;
        if !t.is_symmetric(tol) {
            return Err(CoresetError::invalid("tensor is not symmetric"));
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.data[(i * self.k + j) * self.k + l]
    }

    /// `T += lambda v ⊗ v ⊗ v`.
    pub fn add_rank_one(&mut self, lambda: f64, v: &[f64]) {
        let k = self.k;
        debug_assert_eq!(v.len(), k);
        for i in 0..k {
            let a = lambda * v[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..k {
                let b = a * v[j];
                let row = &mut self.data[(i * k + j) * k..(i * k + j + 1) * k];
                for (t, &c) in row.iter_mut().zip(v) {
                    *t += b * c;
                }
            }
        }
    }

    /// `T(I, v, v)`.
    pub fn apply_ivv(&self, v: &[f64]) -> Vec<f64> {
        let k = self.k;
        (0..k)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..k {
                    let row = &self.data[(i * k + j) * k..(i * k + j + 1) * k];
                    s += v[j] * dot(row, v);
                }
                s
            })
            .collect()
    }

    /// `T(v, v, v)`.
    pub fn value(&self, v: &[f64]) -> f64 {
        dot(&self.apply_ivv(v), v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let k = self.k;
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let v = self.get(i, j, l);
                    for w in [
                        self.get(i, l, j),
                        self.get(j, i, l),
                        self.get(j, l, i),
                        self.get(l, i, j),
                        self.get(l, j, i),
                    ] {
                        if (v - w).abs() > tol * scale {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Elementwise `self + other` (used to add perturbations).
    pub fn add(&mut self, other: &SymTensor3) -> Result<()> {
        if other.k != self.k {
            return Err(CoresetError::DimensionMismatch {
                expected: self.k,
                got: other.k,
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtpiOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl RtpiOptions {
    pub fn new(seed: u64) -> Self {
        RtpiOptions {
            restarts: 30,
            iterations: 50,
            seed,
        }
    }
}

/// Robust tensor power iteration with deflation.
///
/// Each of the `k` rounds runs `restarts` power iterations
/// `v <- T(I, v, v) / ||T(I, v, v)||` from random unit starts, keeps the start
/// with the largest `T(v, v, v)` (earliest start on ties) and deflates
/// `T <- T - lambda v^{⊗3}`. Pairs come back sorted by value, descending.
/// For an odd-order tensor `(lambda, v)` and `(-lambda, -v)` describe the same
/// component; the orientation with positive value is returned.
pub fn rtpi(tensor: &SymTensor3, k: usize, options: &RtpiOptions) -> Result<Vec<EigenPair>> {
    if !tensor.is_symmetric(1e-8) {
        return Err(CoresetError::invalid("rtpi requires a symmetric tensor"));
    }
    let dim = tensor.dim();
    if k == 0 || k > dim {
        return Err(CoresetError::Rank {
            requested: k,
            available: dim,
        });
    }
    if options.restarts == 0 {
        return Err(CoresetError::invalid("rtpi needs at least one restart"));
    }
    let mut rng = rng_from(options.seed, "rtpi");
    let mut t = tensor.clone();
    let mut pairs = Vec::with_capacity(k);
    for round in 0..k {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..options.restarts {
            let mut v = random_unit(dim, &mut rng);
            for _ in 0..options.iterations {
                let u = t.apply_ivv(&v);
                let n = norm2(&u);
                if n == 0.0 || !n.is_finite() {
                    break;
                }
                v = u.into_iter().map(|x| x / n).collect();
            }
            let lambda = t.value(&v);
            if best.as_ref().is_none_or(|(b, _)| lambda > *b) {
                best = Some((lambda, v));
            }
        }
        let (lambda, v) = best.expect("at least one restart");
        if !(lambda > 0.0) {
            return Err(CoresetError::Decomposition(format!(
                "tensor power iteration found no positive eigenvalue in round {}",
                round + 1
            )));
        }
        t.add_rank_one(-lambda, &v);
        pairs.push(EigenPair {
            value: lambda,
            vector: v,
        });
    }
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(pairs)
}

fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
