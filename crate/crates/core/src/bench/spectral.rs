//! Spectral approximation (`p = 2`) on a Gaussian stream: the matrix
//! sampler and the merge-and-reduce tree at a common expected size.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::median;
use crate::error::Result;
use crate::eval::spectral_check;
use crate::rng::{derive_seed, rng_from};
use crate::sampler::plan::sample_to_expected_size;
use crate::sampler::{CoresetEntry, SamplerConfig, SamplerMode};
use crate::stream::{DefaultReducer, ErrorSchedule, MergeReduceTree, ReduceTarget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBenchConfig {
    pub rows: usize,
    pub dim: usize,
    pub eps: f64,
    /// Expected size is `size_factor * d ln d / eps^2`, capped at `rows`.
    pub size_factor: f64,
    pub runs: usize,
    /// Bucket capacity of the merge-and-reduce tree.
    pub bucket: usize,
    pub seed: u64,
}

impl SpectralBenchConfig {
    pub fn desk(seed: u64) -> Self {
        SpectralBenchConfig {
            rows: 2000,
            dim: 10,
            eps: 0.25,
            size_factor: 8.0,
            runs: 100,
            bucket: 500,
            seed,
        }
    }

    pub fn nominal_size(&self) -> f64 {
        let d = self.dim as f64;
        self.size_factor * d * d.ln() / (self.eps * self.eps)
    }

    pub fn matched_size(&self) -> f64 {
        self.nominal_size().min(self.rows as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub label: String,
    pub expected_size: f64,
    pub median_error: f64,
    pub max_error: f64,
    /// Fraction of runs with error at most `eps`.
    pub pass_rate: f64,
    pub mean_kept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub config: SpectralBenchConfig,
    pub nominal_size: f64,
    pub rows: Vec<SpectralRow>,
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,expected_size,median_error,max_error,pass_rate,mean_kept\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{:.6},{:.6},{:.3},{:.3}\n",
                r.label, r.expected_size, r.median_error, r.max_error, r.pass_rate, r.mean_kept
            ));
        }
        out
    }

    pub fn row(&self, label: &str) -> Option<&SpectralRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

pub fn gaussian_stream(rows: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed, "spectral-bench/data");
    (0..rows)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Finalized merge-and-reduce coreset of `rows` for `p = 2`, with every
/// reduction targeting `target` points.
pub fn merge_reduce_p2(
    rows: &[Vec<f64>],
    bucket: usize,
    eps: f64,
    target: usize,
    seed: u64,
) -> Result<Vec<CoresetEntry>> {
    let reducer = DefaultReducer::new(2, ReduceTarget::Fixed(target), seed)?;
    let mut tree = MergeReduceTree::new(bucket, ErrorSchedule::new(eps)?, reducer)?;
    for r in rows {
        tree.push_row(r)?;
    }
    Ok(tree
        .finalize()
        .into_iter()
        .map(|q| CoresetEntry::from_record(q.index, q.row, 1.0 / q.weight, q.weight, 2))
        .collect())
}

pub fn spectral_benchmark(config: &SpectralBenchConfig) -> Result<SpectralReport> {
    let rows = gaussian_stream(config.rows, config.dim, config.seed);
    let size = config.matched_size();
    let mut out = Vec::new();

    let control: Vec<CoresetEntry> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| CoresetEntry::new(i, r.clone(), 1.0, 2))
        .collect();
    let e = spectral_check(&rows, &control)?;
    out.push(SpectralRow {
        label: "control(C=A)".into(),
        expected_size: rows.len() as f64,
        median_error: e,
        max_error: e,
        pass_rate: if e <= config.eps { 1.0 } else { 0.0 },
        mean_kept: rows.len() as f64,
    });

    let summarize = |label: &str, errors: Vec<f64>, kept: usize| SpectralRow {
        label: label.to_string(),
        expected_size: size,
        median_error: median(&errors).unwrap_or(f64::NAN),
        max_error: errors.iter().fold(0.0_f64, |m, &v| m.max(v)),
        pass_rate: errors.iter().filter(|&&v| v <= config.eps).count() as f64 / errors.len().max(1) as f64,
        mean_kept: kept as f64 / errors.len().max(1) as f64,
    };

    for (label, mode) in [("matrix_p2", SamplerMode::MatrixP2), ("uniform", SamplerMode::Uniform)] {
        let mut errors = Vec::with_capacity(config.runs);
        let mut kept = 0;
        for run in 0..config.runs {
            let seed = derive_seed(config.seed, &format!("spectral-bench/{label}/{run}"));
            let cfg = SamplerConfig::new(mode, 2, 1.0, seed).with_eps(config.eps);
            let s = sample_to_expected_size(&rows, &cfg, size, 1.0)?;
            kept += s.entries.len();
            errors.push(spectral_check(&rows, &s.entries)?);
        }
        out.push(summarize(label, errors, kept));
    }

    let mut errors = Vec::with_capacity(config.runs);
    let mut kept = 0;
    for run in 0..config.runs {
        let seed = derive_seed(config.seed, &format!("spectral-bench/merge-reduce/{run}"));
        let c = merge_reduce_p2(&rows, config.bucket, config.eps, size.round() as usize, seed)?;
        kept += c.len();
        errors.push(spectral_check(&rows, &c)?);
    }
    out.push(summarize("merge_reduce", errors, kept));

    Ok(SpectralReport {
        config: config.clone(),
        nominal_size: config.nominal_size(),
        rows: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let c = SpectralBenchConfig::desk(0);
        assert!((c.nominal_size() - 8.0 * 10.0 * 10f64.ln() / 0.0625).abs() < 1e-9);
        assert_eq!(c.matched_size(), 2000.0);
    }

    #[test]
    fn small_run_has_zero_control() {
        let cfg = SpectralBenchConfig {
            rows: 300,
            dim: 4,
            eps: 0.5,
            size_factor: 1.0,
            runs: 3,
            bucket: 64,
            seed: 2,
        };
        let r = spectral_benchmark(&cfg).unwrap();
        assert!(r.row("control(C=A)").unwrap().median_error < 1e-14);
        assert_eq!(r.rows.len(), 4);
        assert!(r.to_csv().lines().count() == 5);
    }
}
