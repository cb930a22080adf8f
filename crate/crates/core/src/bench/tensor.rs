//! Fourth-order tensor contractions on a stream whose rows live almost
//! entirely in one subspace, with a handful of rows from an orthogonal one.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{default_samplers, run_table, BenchSampler, Table};
use crate::error::{CoresetError, Result};
use crate::eval::{contract_entries, contract_rows, ContractMode, QuerySet};
use crate::linalg::{matrix_from_rows, norm2, DenseMatrix};
use crate::rng::rng_from;
use crate::sampler::plan::DEFAULT_STAGE1_FACTOR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorBenchConfig {
    pub rows: usize,
    pub dim: usize,
    pub bulk_dim: usize,
    pub rare_dim: usize,
    /// Fraction of rows drawn from the rare subspace...
    pub rare_fraction: f64,
    /// ...but never fewer than this, so the data keeps full rank
    /// `bulk_dim + rare_dim`.
    pub min_rare_rows: usize,
    pub p: u32,
    /// Sizes of the bottom-singular query table.
    pub query_sizes: Vec<usize>,
    pub query_count: usize,
    /// Sizes of the smallest-singular-direction table.
    pub max_variance_sizes: Vec<usize>,
    pub reps: usize,
    pub stage1_factor: f64,
    pub seed: u64,
}

impl TensorBenchConfig {
    /// 20K rows in `R^30`.
    pub fn desk(seed: u64) -> Self {
        TensorBenchConfig {
            rows: 20_000,
            dim: 30,
            bulk_dim: 8,
            rare_dim: 4,
            rare_fraction: 1e-4,
            min_rare_rows: 4,
            p: 4,
            query_sizes: vec![200, 250, 300, 350],
            query_count: 5,
            max_variance_sizes: vec![100, 200, 300, 500],
            reps: 5,
            stage1_factor: DEFAULT_STAGE1_FACTOR,
            seed,
        }
    }

    /// 200K rows, the original scale.
    pub fn full(seed: u64) -> Self {
        TensorBenchConfig {
            rows: 200_000,
            ..Self::desk(seed)
        }
    }

    pub fn rare_rows(&self) -> usize {
        ((self.rare_fraction * self.rows as f64).round() as usize)
            .max(self.min_rare_rows)
            .min(self.rows)
    }
}

/// Generated stream: unit rows `normalize(B u)` with `u` uniform on
/// `[0,1]^k` and `B` an orthonormal basis of the bulk or rare subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorData {
    pub rows: Vec<Vec<f64>>,
    /// Stream positions of the rare rows.
    pub rare_positions: Vec<usize>,
    pub bulk_basis: DenseMatrix,
    pub rare_basis: DenseMatrix,
}

impl TensorData {
    pub fn generate(config: &TensorBenchConfig) -> Result<Self> {
        let c = config;
        if c.bulk_dim == 0 || c.bulk_dim + c.rare_dim > c.dim {
            return Err(CoresetError::invalid(
                "subspace dimensions must fit in the ambient dimension",
            ));
        }
        let mut rng = rng_from(c.seed, "tensor-bench/data");
        let g = DenseMatrix::from_fn(c.dim, c.bulk_dim + c.rare_dim, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        let bulk_basis = q.columns(0, c.bulk_dim).into_owned();
        let rare_basis = q.columns(c.bulk_dim, c.rare_dim).into_owned();
        let n_rare = c.rare_rows();
        let mut kinds: Vec<bool> = (0..c.rows).map(|i| i < n_rare).collect();
        kinds.shuffle(&mut rng);
        let mut rows = Vec::with_capacity(c.rows);
        let mut rare_positions = Vec::with_capacity(n_rare);
        for (i, rare) in kinds.into_iter().enumerate() {
            let basis = if rare { &rare_basis } else { &bulk_basis };
            let u = nalgebra::DVector::from_fn(basis.ncols(), |_, _| rng.gen::<f64>());
            let v = basis * u;
            let n = v.norm();
            rows.push(v.iter().map(|x| x / n).collect());
            if rare {
                rare_positions.push(i);
            }
        }
        Ok(TensorData {
            rows,
            rare_positions,
            bulk_basis,
            rare_basis,
        })
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        let d = self.rows.first().map_or(0, Vec::len);
        matrix_from_rows(&self.rows, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub config: TensorBenchConfig,
    pub rank: usize,
    pub rare_rows: usize,
    /// `|sum_Q T(x) - sum_Q T_hat(x)| / sum_Q T(x)` over the bottom singular
    /// directions.
    pub query_set: Table,
    /// Relative error along the right singular vector of the smallest
    /// nonzero singular value.
    pub max_variance: Table,
}

pub fn tensor_benchmark(config: &TensorBenchConfig, samplers: Option<Vec<BenchSampler>>) -> Result<TensorReport> {
    let data = TensorData::generate(config)?;
    let a = data.matrix()?;
    let rank = crate::linalg::svd(&a, crate::linalg::DEFAULT_RANK_TOL)?.rank();
    let samplers = samplers.unwrap_or_else(|| default_samplers(config.p));
    let bottom = QuerySet::bottom_singular(&a, config.query_count)?;
    let smallest = QuerySet::bottom_singular(&a, 1)?;
    let p = config.p;

    let truth_sum = |q: &QuerySet| -> Result<f64> {
        q.vectors
            .iter()
            .map(|x| contract_rows(&data.rows, x, p, ContractMode::Signed))
            .sum()
    };
    let t_bottom = truth_sum(&bottom)?;
    let t_small = truth_sum(&smallest)?;
    let metric = |q: &QuerySet, truth: f64| {
        let q = q.clone();
        move |s: &crate::sampler::plan::PlannedSample| -> Result<f64> {
            let est: f64 = q
                .vectors
                .iter()
                .map(|x| contract_entries(&s.entries, x, p, ContractMode::Signed))
                .sum::<Result<f64>>()?;
            Ok((truth - est).abs() / truth.abs())
        }
    };
    let query_set = run_table(
        "query_set",
        &data.rows,
        &samplers,
        &config.query_sizes,
        config.reps,
        config.seed,
        config.stage1_factor,
        metric(&bottom, t_bottom),
    );
    let max_variance = run_table(
        "max_variance",
        &data.rows,
        &samplers,
        &config.max_variance_sizes,
        config.reps,
        config.seed,
        config.stage1_factor,
        metric(&smallest, t_small),
    );
    debug_assert!(data.rows.iter().all(|r| (norm2(r) - 1.0).abs() < 1e-12));
    Ok(TensorReport {
        config: config.clone(),
        rank,
        rare_rows: data.rare_positions.len(),
        query_set,
        max_variance,
    })
}
