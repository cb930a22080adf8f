//! Method-of-moments recovery of a single-topic model from (weighted) rows:
//! second moment, whitening, whitened third moment, tensor power iteration
//! and unwhitening to topic vectors.

mod corpus;
mod matching;
mod tensor;

pub use corpus::{CorpusConfig, SyntheticCorpus};
pub use matching::min_cost_assignment;
pub use tensor::{rtpi, EigenPair, RtpiOptions, SymTensor3, MAX_TENSOR_DIM};

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::eval::weighted_gram;
use crate::linalg::{sym_eigen_desc, DenseMatrix};

/// Relative eigenvalue cutoff used for the numerical rank of `M2`.
pub const MOMENT_RANK_TOL: f64 = 1e-10;

/// Weighted moments of a row set. The third moment is only ever evaluated
/// through a whitening map, so the `d^3` tensor is never formed.
#[derive(Debug, Clone)]
pub struct Moments {
    /// `sum w a a^T / sum w`.
    pub m2: DenseMatrix,
    pub total_weight: f64,
    rows: Vec<(Vec<f64>, f64)>,
}

impl Moments {
    /// Estimate moments and check that `M2` has numerical rank at least `k`.
    pub fn estimate<'a, I>(points: I, k: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        let rows: Vec<(Vec<f64>, f64)> = points.into_iter().map(|(r, w)| (r.to_vec(), w)).collect();
        let Some(dim) = rows.first().map(|(r, _)| r.len()) else {
            return Err(CoresetError::invalid("moments of an empty row set"));
        };
        if rows.iter().any(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(CoresetError::invalid("moment weights must be positive"));
        }
        let total_weight: f64 = rows.iter().map(|(_, w)| w).sum();
        let mut m2 = weighted_gram(rows.iter().map(|(r, w)| (r.as_slice(), *w)), dim)?;
        m2 /= total_weight;
        let available = numerical_rank(&m2);
        if k > available {
            return Err(CoresetError::Rank {
                requested: k,
                available,
            });
        }
        Ok(Moments { m2, total_weight, rows })
    }

    /// `T3(W, W, W) = sum w (W^T a)^{⊗3} / sum w` as a dense `k×k×k` tensor.
    pub fn whitened_third(&self, whitening: &WhiteningMatrix) -> Result<SymTensor3> {
        let k = whitening.w.ncols();
        let mut t = SymTensor3::zeros(k)?;
        let wt = whitening.w.transpose();
        for (row, w) in &self.rows {
            let y = &wt * nalgebra::DVectorView::from_slice(row, row.len());
            t.add_rank_one(w / self.total_weight, y.as_slice());
        }
        Ok(t)
    }
}

fn numerical_rank(m: &DenseMatrix) -> usize {
    let (vals, _) = sym_eigen_desc(m);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    vals.iter().filter(|&&v| v > MOMENT_RANK_TOL * top && v > 0.0).count()
}

/// `W = V_k S_k^(-1/2)` with `W^T M2 W = I_k`, and `W_pinv = S_k^(1/2) V_k^T`
/// so that `(W^T)^† = W_pinv^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningMatrix {
    pub w: DenseMatrix,
    pub w_pinv: DenseMatrix,
}

/// Whitening from the top-`k` eigenpairs of `m2`. Eigenvectors are oriented
/// with their largest-magnitude coordinate positive.
pub fn build_whitening(m2: &DenseMatrix, k: usize) -> Result<WhiteningMatrix> {
    let d = m2.nrows();
    if m2.ncols() != d {
        return Err(CoresetError::invalid("second moment must be square"));
    }
    if k == 0 || k > d {
        return Err(CoresetError::Rank {
            requested: k,
            available: d,
        });
    }
    let (vals, vecs) = sym_eigen_desc(m2);
    let top = vals[0].max(0.0);
    let available = vals.iter().filter(|&&v| v > MOMENT_RANK_TOL * top && v > 0.0).count();
    if available < k {
        return Err(CoresetError::Rank {
            requested: k,
            available,
        });
    }
    let mut w = DenseMatrix::zeros(d, k);
    let mut w_pinv = DenseMatrix::zeros(k, d);
    for c in 0..k {
        let mut v = vecs.column(c).clone_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v = -v;
        }
        let s = vals[c].sqrt();
        w.set_column(c, &(&v / s));
        w_pinv.set_row(c, &(v.transpose() * s));
    }
    Ok(WhiteningMatrix { w, w_pinv })
}

/// A recovered component: mixing weight and topic vector in the original
/// space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub weight: f64,
    pub vector: Vec<f64>,
}

/// `mu = lambda (W^T)^† v` with weight `1 / lambda^2`. Pairs with a
/// non-positive value are skipped with a warning. With `simplex` set,
/// negative entries are clipped and the vector rescaled to unit `l_1` norm.
pub fn unwhiten(pairs: &[EigenPair], whitening: &WhiteningMatrix, simplex: bool) -> Vec<Topic> {
    let mut topics = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        if !(pair.value > 0.0) {
            log::warn!("skipping eigenpair {i} with non-positive value {}", pair.value);
            continue;
        }
        let v = nalgebra::DVectorView::from_slice(&pair.vector, pair.vector.len());
        let mu = whitening.w_pinv.transpose() * v * pair.value;
        let mut vector: Vec<f64> = mu.iter().copied().collect();
        if simplex {
            vector.iter_mut().for_each(|x| *x = x.max(0.0));
            let s: f64 = vector.iter().sum();
            if s > 0.0 {
                vector.iter_mut().for_each(|x| *x /= s);
            } else {
                log::warn!("topic {i} has no positive mass after clipping");
            }
        }
        topics.push(Topic {
            weight: 1.0 / (pair.value * pair.value),
            vector,
        });
    }
    topics
}

/// Moments, whitening, power iteration and unwhitening in one call.
pub fn fit_topics<'a, I>(points: I, k: usize, options: &RtpiOptions, simplex: bool) -> Result<Vec<Topic>>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let moments = Moments::estimate(points, k)?;
    let whitening = build_whitening(&moments.m2, k)?;
    let t = moments.whitened_third(&whitening)?;
    let pairs = rtpi(&t, k, options)?;
    Ok(unwhiten(&pairs, &whitening, simplex))
}

/// Average `l_1` distance between `estimated` and `reference` topics under
/// the best one-to-one matching. Reference topics left unmatched (fewer
/// estimates than references) are charged their distance to the zero vector.
pub fn matched_l1_error(estimated: &[Topic], reference: &[Topic]) -> Result<f64> {
    if reference.is_empty() {
        return Err(CoresetError::invalid("no reference topics"));
    }
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    let k = reference.len();
    let mut cost: Vec<Vec<f64>> = estimated
        .iter()
        .take(k)
        .map(|e| reference.iter().map(|r| l1(&e.vector, &r.vector)).collect())
        .collect();
    while cost.len() < k {
        cost.push(
            reference
                .iter()
                .map(|r| r.vector.iter().map(|x| x.abs()).sum())
                .collect(),
        );
    }
    let (_, total) = min_cost_assignment(&cost)?;
    Ok(total / k as f64)
}
