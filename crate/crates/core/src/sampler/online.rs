use crate::error::Result;
use crate::leverage::{CovarianceTracker, LeverageRecord};
use crate::rng::{bernoulli, rng_from, SeededRng};

use super::{check_rate, CoresetEntry, RowSampler};

/// Online sensitivity `min(1, i^(p/2 - 1) * e^(p/2))` of the `i`-th row
/// (1-based) with online leverage `e`.
pub fn online_sensitivity(leverage: f64, index: usize, p: u32) -> f64 {
    if leverage <= 0.0 {
        return 0.0;
    }
    let half = f64::from(p) / 2.0;
    let v = (index as f64).powf(half - 1.0) * leverage.powf(half);
    v.min(1.0)
}

/// Scores of one row before the sampling decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineScore {
    pub leverage: LeverageRecord,
    pub sensitivity: f64,
    /// Running sensitivity sum including this row.
    pub sensitivity_sum: f64,
    /// The first nonzero row is always kept.
    pub forced: bool,
}

impl OnlineScore {
    /// Inclusion probability is `min(1, r * coefficient)`.
    pub fn coefficient(&self) -> f64 {
        if self.forced {
            f64::INFINITY
        } else if self.sensitivity <= 0.0 {
            0.0
        } else {
            self.sensitivity / self.sensitivity_sum
        }
    }

    pub fn probability(&self, r: f64) -> f64 {
        rate_probability(r, self.coefficient())
    }
}

pub(crate) fn rate_probability(r: f64, coefficient: f64) -> f64 {
    if coefficient <= 0.0 {
        0.0
    } else if coefficient.is_infinite() {
        1.0
    } else {
        (r * coefficient).min(1.0)
    }
}

/// Keeps row `i` with probability `min(1, r * l_i / sum_{j<=i} l_j)`.
#[derive(Debug, Clone)]
pub struct OnlineSampler {
    p: u32,
    r: f64,
    tracker: CovarianceTracker,
    sensitivity_sum: f64,
    expected_size: f64,
    seen_nonzero: bool,
    rng: SeededRng,
}

impl OnlineSampler {
    pub fn new(dim: usize, p: u32, r: f64, seed: u64) -> Self {
        OnlineSampler {
            p,
            r,
            tracker: CovarianceTracker::new(dim),
            sensitivity_sum: 0.0,
            expected_size: 0.0,
            seen_nonzero: false,
            rng: rng_from(seed, "online"),
        }
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn set_rate(&mut self, r: f64) -> Result<()> {
        check_rate(r)?;
        self.r = r;
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn tracker(&self) -> &CovarianceTracker {
        &self.tracker
    }

    pub fn sensitivity_sum(&self) -> f64 {
        self.sensitivity_sum
    }

    /// Update the covariance state with `row` and return its scores without
    /// drawing. Must be followed by [`decide`](Self::decide) for the same row
    /// when sampling.
    pub fn score(&mut self, row: &[f64]) -> Result<OnlineScore> {
        let leverage = self.tracker.ingest(row)?;
        let sensitivity = online_sensitivity(leverage.score, leverage.index, self.p);
        self.sensitivity_sum += sensitivity;
        let forced = sensitivity > 0.0 && !self.seen_nonzero;
        self.seen_nonzero |= sensitivity > 0.0;
        Ok(OnlineScore {
            leverage,
            sensitivity,
            sensitivity_sum: self.sensitivity_sum,
            forced,
        })
    }

    /// Draw the keep/drop decision for a scored row.
    pub fn decide(&mut self, row: &[f64], score: &OnlineScore) -> Option<CoresetEntry> {
        let probability = score.probability(self.r);
        self.expected_size += probability;
        if bernoulli(&mut self.rng, probability) {
            Some(CoresetEntry::new(
                score.leverage.index - 1,
                row.to_vec(),
                probability,
                self.p,
            ))
        } else {
            None
        }
    }
}

impl RowSampler for OnlineSampler {
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>> {
        let score = self.score(row)?;
        Ok(self.decide(row, &score))
    }

    fn rows_seen(&self) -> usize {
        self.tracker.rows_seen()
    }

    fn expected_size(&self) -> f64 {
        self.expected_size
    }
}
