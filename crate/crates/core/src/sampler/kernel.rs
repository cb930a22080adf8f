use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::leverage::CovarianceTracker;
use crate::linalg::{ensure_finite, kron_power, lifted_dim, sym_power, LiftBudget};
use crate::rng::{bernoulli, rng_from, SeededRng};

use super::online::rate_probability;
use super::{check_rate, CoresetEntry, RowSampler};

/// How rows are lifted before leverage tracking.
///
/// Both lifts have the same inner products, so the leverage scores agree;
/// `Symmetric` stores `C(d+k-1, k)` coordinates instead of `d^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftKind {
    Kronecker,
    #[default]
    Symmetric,
}

impl LiftKind {
    fn lift(&self, x: &[f64], k: u32, budget: LiftBudget) -> Result<Vec<f64>> {
        match self {
            LiftKind::Kronecker => kron_power(x, k, budget),
            LiftKind::Symmetric => sym_power(x, k, budget),
        }
    }
}

/// Lifted leverage scores of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelScore {
    /// Online leverage of the degree-`floor(p/2)` lift.
    pub low: f64,
    /// Online leverage of the degree-`ceil(p/2)` lift (equal to `low` for
    /// even `p`).
    pub high: f64,
    /// `min(1, sqrt(low * high))`.
    pub score: f64,
}

/// Keeps each row with probability `min(1, r * score)` where the score comes
/// from online leverage of tensor-power lifts of the rows.
#[derive(Debug, Clone)]
pub struct KernelFilter {
    p: u32,
    r: f64,
    dim: usize,
    lift: LiftKind,
    budget: LiftBudget,
    low: CovarianceTracker,
    /// Only present for odd `p`.
    high: Option<CovarianceTracker>,
    rows_seen: usize,
    expected_size: f64,
    rng: SeededRng,
}

impl KernelFilter {
    pub fn new(dim: usize, p: u32, r: f64, seed: u64) -> Result<Self> {
        Self::with_lift(dim, p, r, seed, LiftKind::default(), LiftBudget::default())
    }

    /// Fails with a capacity error when `dim^ceil(p/2)` exceeds the budget.
    pub fn with_lift(dim: usize, p: u32, r: f64, seed: u64, lift: LiftKind, budget: LiftBudget) -> Result<Self> {
        if p < 2 {
            return Err(CoresetError::invalid(format!("p must be >= 2, got {p}")));
        }
        check_rate(r)?;
        let k_low = p / 2;
        let k_high = p.div_ceil(2);
        budget.check(
            &format!("lifted dimension {dim}^{k_high}"),
            lifted_dim(dim, k_high).unwrap_or(u128::MAX),
        )?;
        let lifted = |k: u32| -> usize {
            match lift {
                LiftKind::Kronecker => lifted_dim(dim, k).expect("checked") as usize,
                LiftKind::Symmetric => crate::linalg::sym_power_dim(dim, k).expect("checked") as usize,
            }
        };
        let high = (k_high != k_low).then(|| CovarianceTracker::new(lifted(k_high)));
        Ok(KernelFilter {
            p,
            r,
            dim,
            lift,
            budget,
            low: CovarianceTracker::new(lifted(k_low)),
            high,
            rows_seen: 0,
            expected_size: 0.0,
            rng: rng_from(seed, "kernel"),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn set_rate(&mut self, r: f64) -> Result<()> {
        check_rate(r)?;
        self.r = r;
        Ok(())
    }

    /// Update both lifted trackers with `row` and return its score.
    pub fn score(&mut self, row: &[f64]) -> Result<KernelScore> {
        if row.len() != self.dim {
            return Err(CoresetError::DimensionMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        ensure_finite(row)?;
        self.rows_seen += 1;
        let k_low = self.p / 2;
        let low_lift = self.lift.lift(row, k_low, self.budget)?;
        let low = self.low.ingest(&low_lift)?.score;
        let high = match self.high.as_mut() {
            Some(t) => {
                let high_lift = self.lift.lift(row, k_low + 1, self.budget)?;
                t.ingest(&high_lift)?.score
            }
            None => low,
        };
        let score = if self.high.is_some() {
            (low.sqrt() * high.sqrt()).min(1.0)
        } else {
            low.min(1.0)
        };
        Ok(KernelScore { low, high, score })
    }

    /// Draw the keep decision for the row scored most recently. `index` is
    /// the row's stream position.
    pub fn decide(&mut self, index: usize, row: &[f64], score: &KernelScore) -> Option<CoresetEntry> {
        let probability = rate_probability(self.r, score.score);
        self.expected_size += probability;
        bernoulli(&mut self.rng, probability).then(|| CoresetEntry::new(index, row.to_vec(), probability, self.p))
    }

    pub fn low_tracker(&self) -> &CovarianceTracker {
        &self.low
    }

    pub fn high_tracker(&self) -> Option<&CovarianceTracker> {
        self.high.as_ref()
    }
}

impl RowSampler for KernelFilter {
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>> {
        let score = self.score(row)?;
        Ok(self.decide(self.rows_seen - 1, row, &score))
    }

    fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    fn expected_size(&self) -> f64 {
        self.expected_size
    }
}
