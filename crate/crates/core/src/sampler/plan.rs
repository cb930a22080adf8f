//! Sampling calibrated to an expected coreset size.
//!
//! Scores of the online samplers do not depend on the random draws, so a
//! sampler can score the whole stream first, solve for the rate that gives
//! the requested expected size, and then draw exactly as the streaming
//! sampler would have with that rate. For the two-stage pipeline the first
//! stage is calibrated to `stage1_factor * target`, and the kernel stage is
//! calibrated on the rows that survived it.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};

use super::{
    rate_for_expected_size, CoresetEntry, KernelFilter, MatrixSampler, OnlineSampler, Pipeline, RowSampler,
    SamplerConfig, SamplerMode, UniformSampler,
};

pub const DEFAULT_STAGE1_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSample {
    pub entries: Vec<CoresetEntry>,
    /// Rate of the (first) stage.
    pub rate: f64,
    /// Rate of the kernel stage of the pipeline.
    pub kernel_rate: Option<f64>,
    /// Expected size of the final sample given the rates.
    pub expected_size: f64,
    /// Variance of the final sample size, `sum p (1 - p)` over the rows
    /// offered to the last stage.
    pub variance: f64,
}

fn size_variance(coefficients: &[f64], rate: f64) -> f64 {
    coefficients
        .iter()
        .map(|&c| {
            let p = super::online::rate_probability(rate, c);
            p * (1.0 - p)
        })
        .sum()
}

/// Sample `rows` with the sampler described by `config` (its `r` fields are
/// ignored) so that the expected number of kept rows is `target`.
pub fn sample_to_expected_size<R: AsRef<[f64]>>(
    rows: &[R],
    config: &SamplerConfig,
    target: f64,
    stage1_factor: f64,
) -> Result<PlannedSample> {
    let n = rows.len();
    let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
    let mut cfg = config.clone();
    cfg.r = 1.0;
    cfg.r_kernel = None;
    cfg.n_hint.get_or_insert(n);
    cfg.validate()?;
    if !(stage1_factor >= 1.0) {
        return Err(CoresetError::invalid("stage-1 factor must be >= 1"));
    }
    match cfg.mode {
        SamplerMode::Online => {
            let mut s = OnlineSampler::new(dim, cfg.p, 0.0, cfg.seed);
            let (entries, sol, variance) = online_stage(&mut s, rows, target)?;
            Ok(PlannedSample {
                entries,
                rate: sol.rate,
                kernel_rate: None,
                expected_size: sol.expected,
                variance,
            })
        }
        SamplerMode::Kernel => {
            let mut f = KernelFilter::with_lift(dim, cfg.p, 0.0, cfg.seed, cfg.lift, cfg.budget)?;
            let scored: Vec<(usize, &[f64])> = rows.iter().map(|r| r.as_ref()).enumerate().collect();
            let (entries, sol, variance) = kernel_stage(&mut f, &scored, target)?;
            Ok(PlannedSample {
                entries,
                rate: sol.rate,
                kernel_rate: None,
                expected_size: sol.expected,
                variance,
            })
        }
        SamplerMode::MatrixP2 => {
            let mut s = MatrixSampler::new(dim, 0.0, cfg.eps, cfg.seed);
            let mut coefficients = Vec::with_capacity(n);
            for (i, row) in rows.iter().enumerate() {
                coefficients.push(s.score(row.as_ref()).map_err(|e| e.at_row(i))?);
            }
            let sol = rate_for_expected_size(&coefficients, target)?;
            let variance = size_variance(&coefficients, sol.rate);
            s.set_rate(sol.rate)?;
            let entries = rows
                .iter()
                .zip(&coefficients)
                .enumerate()
                .filter_map(|(i, (row, &c))| s.decide(i, row.as_ref(), c))
                .collect();
            Ok(PlannedSample {
                entries,
                rate: sol.rate,
                kernel_rate: None,
                expected_size: sol.expected,
                variance,
            })
        }
        SamplerMode::Uniform => {
            let r = target.min(n as f64);
            let mut s = UniformSampler::new(r, n.max(1), cfg.p, cfg.seed)?;
            let mut entries = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                if let Some(e) = s.step(row.as_ref()).map_err(|e| e.at_row(i))? {
                    entries.push(e);
                }
            }
            Ok(PlannedSample {
                entries,
                rate: r,
                kernel_rate: None,
                expected_size: s.expected_size(),
                variance: n as f64 * (r / n.max(1) as f64) * (1.0 - r / n.max(1) as f64),
            })
        }
        SamplerMode::OnlineThenKernel => {
            let (s1, s2) = Pipeline::stage_seeds(cfg.seed);
            let mut online = OnlineSampler::new(dim, cfg.p, 0.0, s1);
            let stage1_target = (stage1_factor * target).min(n as f64);
            let (first, sol1, _) = online_stage(&mut online, rows, stage1_target)?;
            let mut kernel = KernelFilter::with_lift(dim, cfg.p, 0.0, s2, cfg.lift, cfg.budget)?;
            let scaled: Vec<(usize, &[f64])> = first.iter().map(|e| (e.index, e.scaled_row.as_slice())).collect();
            let (second, sol2, variance) = kernel_stage(&mut kernel, &scaled, target)?;
            let by_index: std::collections::HashMap<usize, &CoresetEntry> =
                first.iter().map(|e| (e.index, e)).collect();
            let entries = second
                .iter()
                .map(|s| Pipeline::combine(by_index[&s.index], s, cfg.p))
                .collect();
            Ok(PlannedSample {
                entries,
                rate: sol1.rate,
                kernel_rate: Some(sol2.rate),
                expected_size: sol2.expected,
                variance,
            })
        }
    }
}

fn online_stage<R: AsRef<[f64]>>(
    s: &mut OnlineSampler,
    rows: &[R],
    target: f64,
) -> Result<(Vec<CoresetEntry>, super::RateSolution, f64)> {
    let mut scores = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        scores.push(s.score(row.as_ref()).map_err(|e| e.at_row(i))?);
    }
    let coefficients: Vec<f64> = scores.iter().map(|s| s.coefficient()).collect();
    let sol = rate_for_expected_size(&coefficients, target)?;
    s.set_rate(sol.rate)?;
    let entries = rows
        .iter()
        .zip(&scores)
        .filter_map(|(row, score)| s.decide(row.as_ref(), score))
        .collect();
    Ok((entries, sol, size_variance(&coefficients, sol.rate)))
}

fn kernel_stage(
    f: &mut KernelFilter,
    rows: &[(usize, &[f64])],
    target: f64,
) -> Result<(Vec<CoresetEntry>, super::RateSolution, f64)> {
    let mut scores = Vec::with_capacity(rows.len());
    for (i, row) in rows {
        scores.push(f.score(row).map_err(|e| e.at_row(*i))?);
    }
    let coefficients: Vec<f64> = scores.iter().map(|s| s.score).collect();
    let sol = rate_for_expected_size(&coefficients, target)?;
    f.set_rate(sol.rate)?;
    let entries = rows
        .iter()
        .zip(&scores)
        .filter_map(|((i, row), score)| f.decide(*i, row, score))
        .collect();
    Ok((entries, sol, size_variance(&coefficients, sol.rate)))
}
