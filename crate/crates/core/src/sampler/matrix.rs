use crate::error::Result;
use crate::leverage::CovarianceTracker;
use crate::rng::{bernoulli, rng_from, SeededRng};

use super::online::rate_probability;
use super::{CoresetEntry, RowSampler};

/// Spectral (p = 2) sampler: keeps row `i` with probability
/// `min(1, r * min((1 + eps) e_i, 1))`.
#[derive(Debug, Clone)]
pub struct MatrixSampler {
    r: f64,
    eps: f64,
    tracker: CovarianceTracker,
    expected_size: f64,
    rng: SeededRng,
}

impl MatrixSampler {
    pub fn new(dim: usize, r: f64, eps: f64, seed: u64) -> Self {
        MatrixSampler {
            r,
            eps,
            tracker: CovarianceTracker::new(dim),
            expected_size: 0.0,
            rng: rng_from(seed, "matrix_p2"),
        }
    }

    pub fn tracker(&self) -> &CovarianceTracker {
        &self.tracker
    }

    /// Score coefficient of the next row; probability is `min(1, r * c)`.
    pub fn score(&mut self, row: &[f64]) -> Result<f64> {
        let e = self.tracker.ingest(row)?.score;
        Ok(((1.0 + self.eps) * e).min(1.0))
    }

    pub fn set_rate(&mut self, r: f64) -> Result<()> {
        super::check_rate(r)?;
        self.r = r;
        Ok(())
    }

    pub fn decide(&mut self, index: usize, row: &[f64], coefficient: f64) -> Option<CoresetEntry> {
        let probability = rate_probability(self.r, coefficient);
        self.expected_size += probability;
        bernoulli(&mut self.rng, probability).then(|| CoresetEntry::new(index, row.to_vec(), probability, 2))
    }
}

impl RowSampler for MatrixSampler {
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>> {
        let c = self.score(row)?;
        Ok(self.decide(self.tracker.rows_seen() - 1, row, c))
    }

    fn rows_seen(&self) -> usize {
        self.tracker.rows_seen()
    }

    fn expected_size(&self) -> f64 {
        self.expected_size
    }
}
