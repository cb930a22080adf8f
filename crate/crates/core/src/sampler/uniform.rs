use crate::error::{CoresetError, Result};
use crate::rng::{bernoulli, rng_from, SeededRng};

use super::{check_rate, CoresetEntry, RowSampler};

/// Keeps every row independently with probability `min(1, r / n)`, where `n`
/// is the stream length known in advance.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    probability: f64,
    p: u32,
    rows_seen: usize,
    rng: SeededRng,
}

impl UniformSampler {
    pub fn new(r: f64, n_hint: usize, p: u32, seed: u64) -> Result<Self> {
        check_rate(r)?;
        if n_hint == 0 {
            return Err(CoresetError::invalid("uniform sampling needs a positive stream length"));
        }
        Ok(UniformSampler {
            probability: (r / n_hint as f64).min(1.0),
            p,
            rows_seen: 0,
            rng: rng_from(seed, "uniform"),
        })
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }
}

impl RowSampler for UniformSampler {
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>> {
        crate::linalg::ensure_finite(row)?;
        let index = self.rows_seen;
        self.rows_seen += 1;
        Ok(bernoulli(&mut self.rng, self.probability)
            .then(|| CoresetEntry::new(index, row.to_vec(), self.probability, self.p)))
    }

    fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    fn expected_size(&self) -> f64 {
        self.probability * self.rows_seen as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_keeps_nothing() {
        let mut s = UniformSampler::new(0.0, 10, 3, 1).unwrap();
        for _ in 0..10 {
            assert!(s.step(&[1.0]).unwrap().is_none());
        }
    }

    #[test]
    fn rate_at_least_n_keeps_all() {
        let mut s = UniformSampler::new(10.0, 10, 3, 1).unwrap();
        for _ in 0..10 {
            assert_eq!(s.step(&[1.0]).unwrap().unwrap().weight, 1.0);
        }
    }

    #[test]
    fn weights_are_n_over_r() {
        let mut s = UniformSampler::new(25.0, 100, 2, 1).unwrap();
        let kept: Vec<_> = (0..100).filter_map(|_| s.step(&[1.0]).unwrap()).collect();
        assert!(!kept.is_empty());
        assert!(kept.iter().all(|e| e.weight == 4.0));
    }
}
