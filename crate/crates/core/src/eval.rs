//! Ground-truth and coreset-side evaluation: weighted contractions
//! `sum_i w_i (a_i . x)^p`, relative errors, query sets (singular vectors,
//! random directions, epsilon-nets), embedding verification and the spectral
//! check for p = 2.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::linalg::{dot, matrix_from_rows, norm2, spectral_norm, svd, DenseMatrix, DEFAULT_RANK_TOL};
use crate::rng::rng_from;
use crate::sampler::CoresetEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractMode {
    /// `sum w (a . x)^p`
    Signed,
    /// `sum w |a . x|^p`
    Absolute,
}

/// Weighted contraction over `(row, weight)` pairs, summed in input order.
pub fn contract_weighted<'a, I>(points: I, x: &[f64], p: u32, mode: ContractMode) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut total = 0.0;
    for (row, w) in points {
        if row.len() != x.len() {
            return Err(CoresetError::DimensionMismatch {
                expected: x.len(),
                got: row.len(),
            });
        }
        let t = dot(row, x);
        let term = match mode {
            ContractMode::Signed => t.powi(p as i32),
            ContractMode::Absolute => t.abs().powi(p as i32),
        };
        total += w * term;
    }
    Ok(total)
}

/// Contraction over the full data (unit weights).
pub fn contract_rows<R: AsRef<[f64]>>(rows: &[R], x: &[f64], p: u32, mode: ContractMode) -> Result<f64> {
    contract_weighted(rows.iter().map(|r| (r.as_ref(), 1.0)), x, p, mode)
}

/// Contraction over a coreset using the stored weights.
pub fn contract_entries(entries: &[CoresetEntry], x: &[f64], p: u32, mode: ContractMode) -> Result<f64> {
    contract_weighted(entries.iter().map(|e| (e.row.as_slice(), e.weight)), x, p, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub value: f64,
    /// The truth was zero, so `value` is the absolute error.
    pub absolute: bool,
}

pub fn relative_error(truth: f64, estimate: f64) -> RelativeError {
    if truth == 0.0 {
        RelativeError {
            value: estimate.abs(),
            absolute: true,
        }
    } else {
        RelativeError {
            value: (truth - estimate).abs() / truth.abs(),
            absolute: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryProvenance {
    RightSingularSmallest,
    BottomKSingular,
    Net,
    RandomUnit,
}

/// Unit-norm query directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub vectors: Vec<Vec<f64>>,
    pub provenance: QueryProvenance,
}

const UNIT_TOL: f64 = 1e-10;

impl QuerySet {
    pub fn new(vectors: Vec<Vec<f64>>, provenance: QueryProvenance) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            let n = norm2(v);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(CoresetError::invalid(format!("query {i} has norm {n}, expected 1")));
            }
        }
        Ok(QuerySet { vectors, provenance })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Right singular vectors of the `k` smallest nonzero singular values,
    /// smallest first.
    pub fn bottom_singular(a: &DenseMatrix, k: usize) -> Result<Self> {
        let f = svd(a, DEFAULT_RANK_TOL)?;
        if k > f.rank() {
            return Err(CoresetError::Rank {
                requested: k,
                available: f.rank(),
            });
        }
        let vectors = (0..k)
            .map(|i| {
                let c = f.rank() - 1 - i;
                let v: Vec<f64> = f.v.column(c).iter().copied().collect();
                let n = norm2(&v);
                v.into_iter().map(|x| x / n).collect()
            })
            .collect();
        let provenance = if k == 1 {
            QueryProvenance::RightSingularSmallest
        } else {
            QueryProvenance::BottomKSingular
        };
        QuerySet::new(vectors, provenance)
    }

    /// `count` directions drawn uniformly from the unit sphere in `R^dim`.
    pub fn random_unit(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::invalid("query dimension must be positive"));
        }
        let mut rng = rng_from(seed, "random-queries");
        let vectors = (0..count).map(|_| random_unit_vector(dim, &mut rng)).collect();
        QuerySet::new(vectors, QueryProvenance::RandomUnit)
    }
}

fn random_unit_vector<R: rand::Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Largest coefficient dimension accepted by [`epsilon_net`].
pub const NET_MAX_DIM: usize = 6;
/// Largest `(2/eps)^k` accepted by [`epsilon_net`].
pub const NET_MAX_SIZE: f64 = 1e6;

/// Randomized greedy packing of the unit sphere of `R^k`, `k` = number of
/// columns of `basis` (assumed orthonormal). Candidates are uniform unit
/// coefficient vectors; a candidate is kept when its `l_p` distance to every
/// kept coefficient vector exceeds `eps`, and the search stops after
/// `50 (2/eps)^k` consecutive rejections. Returned queries are `basis c`.
pub fn epsilon_net(basis: &DenseMatrix, eps: f64, p: u32, seed: u64) -> Result<QuerySet> {
    let k = basis.ncols();
    if k == 0 {
        return Err(CoresetError::invalid("net basis must have at least one column"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CoresetError::invalid(format!("net eps must be positive, got {eps}")));
    }
    let bound = (2.0 / eps).powi(k as i32);
    if k > NET_MAX_DIM {
        return Err(CoresetError::Capacity {
            what: format!("epsilon net over a {k}-dimensional row space"),
            requested: k as u128,
            budget: NET_MAX_DIM as u128,
        });
    }
    if bound > NET_MAX_SIZE {
        return Err(CoresetError::Capacity {
            what: format!("epsilon net with k={k}, eps={eps}"),
            requested: bound.min(u128::MAX as f64) as u128,
            budget: NET_MAX_SIZE as u128,
        });
    }
    let stall_limit = (50.0 * bound.max(1.0)).ceil() as usize;
    let mut rng = rng_from(seed, "epsilon-net");
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut stall = 0;
    let pf = f64::from(p);
    let eps_p = eps.powf(pf);
    while stall < stall_limit {
        let c = random_unit_vector(k, &mut rng);
        let far = kept.iter().all(|q| {
            let d: f64 = q.iter().zip(&c).map(|(a, b)| (a - b).abs().powf(pf)).sum();
            d > eps_p
        });
        if far {
            kept.push(c);
            stall = 0;
        } else {
            stall += 1;
        }
    }
    let vectors = kept
        .iter()
        .map(|c| {
            let v = basis * nalgebra::DVector::from_column_slice(c);
            let n = v.norm();
            v.iter().map(|x| x / n).collect()
        })
        .collect();
    QuerySet::new(vectors, QueryProvenance::Net)
}

/// Orthonormal basis (d×rank) of the row space of `rows`.
pub fn row_space_basis<R: AsRef<[f64]>>(rows: &[R], dim: usize) -> Result<DenseMatrix> {
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
    Ok(svd(&matrix_from_rows(&owned, dim)?, 1e-10)?.v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub full: f64,
    pub coreset: f64,
    pub ratio: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub queries: Vec<QueryOutcome>,
    pub max_deviation: f64,
    pub eps: f64,
    pub passed: bool,
}

/// Compare absolute-mode contractions of the full data and the coreset on
/// every query.
pub fn verify_embedding<R: AsRef<[f64]>>(
    full: &[R],
    coreset: &[CoresetEntry],
    p: u32,
    eps: f64,
    queries: &QuerySet,
) -> Result<EmbeddingReport> {
    let mut outcomes = Vec::with_capacity(queries.len());
    let mut max_deviation: f64 = 0.0;
    for x in &queries.vectors {
        let f = contract_rows(full, x, p, ContractMode::Absolute)?;
        let c = contract_entries(coreset, x, p, ContractMode::Absolute)?;
        let ratio = if f == 0.0 {
            if c == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            c / f
        };
        let deviation = (ratio - 1.0).abs();
        max_deviation = max_deviation.max(deviation);
        outcomes.push(QueryOutcome {
            full: f,
            coreset: c,
            ratio,
            deviation,
        });
    }
    Ok(EmbeddingReport {
        queries: outcomes,
        max_deviation,
        eps,
        passed: max_deviation <= eps,
    })
}

/// `||C^T C - A^T A|| / ||A^T A||` in spectral norm, where `C^T C` is
/// `sum_i w_i a_i a_i^T` over the coreset.
pub fn spectral_check<R: AsRef<[f64]>>(full: &[R], coreset: &[CoresetEntry]) -> Result<f64> {
    let dim = match full.first() {
        Some(r) => r.as_ref().len(),
        None => return Err(CoresetError::invalid("spectral check on empty data: A^T A is zero")),
    };
    let gram_full = weighted_gram(full.iter().map(|r| (r.as_ref(), 1.0)), dim)?;
    let gram_core = weighted_gram(coreset.iter().map(|e| (e.row.as_slice(), e.weight)), dim)?;
    let denom = spectral_norm(&gram_full);
    if denom == 0.0 {
        return Err(CoresetError::invalid("spectral check: A^T A is zero"));
    }
    Ok(spectral_norm(&(gram_core - gram_full)) / denom)
}

/// `sum_i w_i a_i a_i^T`.
pub fn weighted_gram<'a, I>(points: I, dim: usize) -> Result<DenseMatrix>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut g = DenseMatrix::zeros(dim, dim);
    for (row, w) in points {
        if row.len() != dim {
            return Err(CoresetError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        let v = nalgebra::DVectorView::from_slice(row, dim);
        g.syger(w, &v, &v, 1.0);
    }
    g.fill_upper_triangle_with_lower_triangle();
    Ok(g)
}
