use crate::error::Result;
use crate::linalg::LiftBudget;
use crate::rng::derive_seed;

use super::{CoresetEntry, KernelFilter, LiftKind, OnlineSampler, RowSampler};

/// Online sensitivity sampling followed by the kernel filter. The kernel
/// stage sees the pre-scaled rows kept by the first stage; a row survives
/// with probability `p1 * p2` and its final scaling uses that product.
#[derive(Debug, Clone)]
pub struct Pipeline {
    online: OnlineSampler,
    kernel: KernelFilter,
    p: u32,
}

impl Pipeline {
    pub fn new(dim: usize, p: u32, r_online: f64, r_kernel: f64, seed: u64) -> Result<Self> {
        Self::with_lift(
            dim,
            p,
            r_online,
            r_kernel,
            seed,
            LiftKind::default(),
            LiftBudget::default(),
        )
    }

    pub fn with_lift(
        dim: usize,
        p: u32,
        r_online: f64,
        r_kernel: f64,
        seed: u64,
        lift: LiftKind,
        budget: LiftBudget,
    ) -> Result<Self> {
        let (s1, s2) = Self::stage_seeds(seed);
        Ok(Pipeline {
            online: OnlineSampler::new(dim, p, r_online, s1),
            kernel: KernelFilter::with_lift(dim, p, r_kernel, s2, lift, budget)?,
            p,
        })
    }

    /// Seeds handed to the two stages.
    pub fn stage_seeds(seed: u64) -> (u64, u64) {
        (
            derive_seed(seed, "pipeline/online"),
            derive_seed(seed, "pipeline/kernel"),
        )
    }

    pub fn online(&self) -> &OnlineSampler {
        &self.online
    }

    pub fn kernel(&self) -> &KernelFilter {
        &self.kernel
    }

    /// Combine a first-stage entry with the kernel stage's decision.
    pub(crate) fn combine(first: &CoresetEntry, second: &CoresetEntry, p: u32) -> CoresetEntry {
        CoresetEntry::new(
            first.index,
            first.row.clone(),
            first.probability * second.probability,
            p,
        )
    }
}

impl RowSampler for Pipeline {
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>> {
        let Some(first) = self.online.step(row)? else {
            return Ok(None);
        };
        let score = self.kernel.score(&first.scaled_row)?;
        let second = self.kernel.decide(first.index, &first.scaled_row, &score);
        Ok(second.map(|s| Self::combine(&first, &s, self.p)))
    }

    fn rows_seen(&self) -> usize {
        self.online.rows_seen()
    }

    /// Expected final size conditioned on the first stage's draws so far.
    fn expected_size(&self) -> f64 {
        self.kernel.expected_size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rates_keep_everything_with_unit_weight() {
        let mut pl = Pipeline::new(2, 3, 1e9, 1e9, 5).unwrap();
        for i in 0..20 {
            let row = [1.0 + i as f64, (i as f64).sin()];
            let e = pl.step(&row).unwrap().unwrap();
            assert_eq!(e.index, i);
            assert_eq!(e.probability, 1.0);
            assert_eq!(e.scaled_row, row.to_vec());
        }
    }

    #[test]
    fn combined_probability_and_scaling() {
        let first = CoresetEntry::new(4, vec![2.0, 0.0], 0.5, 3);
        let second = CoresetEntry::new(4, first.scaled_row.clone(), 0.25, 3);
        let c = Pipeline::combine(&first, &second, 3);
        assert_eq!(c.probability, 0.125);
        assert_eq!(c.weight, 8.0);
        assert!((c.scaled_row[0] - 4.0).abs() < 1e-12);
        assert_eq!(c.row, vec![2.0, 0.0]);
    }
}
