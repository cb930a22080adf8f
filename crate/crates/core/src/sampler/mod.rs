//! Row samplers: online sensitivity sampling, the lifted-leverage kernel
//! filter, their two-stage composition, the p = 2 matrix variant and a
//! uniform baseline.
//!
//! Every sampler is a single-writer state machine fed one row at a time. A
//! kept row comes back as a [`CoresetEntry`] carrying its inclusion
//! probability, the inverse-probability weight and the row pre-scaled by
//! `probability^(-1/p)`, so that `sum_kept (scaled_row . x)^p` is an
//! unbiased estimate of `sum_all (row . x)^p`.

mod calibrate;
mod kernel;
mod matrix;
mod online;
mod pipeline;
mod uniform;

pub use calibrate::{kernel_rate_for_guarantee, online_rate_for_guarantee, rate_for_expected_size, RateSolution};
pub use kernel::{KernelFilter, KernelScore, LiftKind};
pub use matrix::MatrixSampler;
pub use online::{online_sensitivity, OnlineSampler, OnlineScore};
pub use pipeline::Pipeline;
pub use uniform::UniformSampler;

pub mod plan;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::linalg::LiftBudget;

/// A retained row. `index` is the 0-based position in the input stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetEntry {
    pub index: usize,
    pub row: Vec<f64>,
    pub probability: f64,
    pub weight: f64,
    pub scaled_row: Vec<f64>,
}

impl CoresetEntry {
    /// Build an entry kept with `probability`; `exponent` is the order `p`
    /// used for the pre-scaled row.
    pub fn new(index: usize, row: Vec<f64>, probability: f64, exponent: u32) -> Self {
        debug_assert!(probability > 0.0 && probability <= 1.0);
        let scale = probability.powf(-1.0 / f64::from(exponent));
        let scaled_row = row.iter().map(|v| v * scale).collect();
        CoresetEntry {
            index,
            row,
            probability,
            weight: 1.0 / probability,
            scaled_row,
        }
    }

    /// Rebuild from a stored `(index, probability, weight, row)` record.
    pub fn from_record(index: usize, row: Vec<f64>, probability: f64, weight: f64, exponent: u32) -> Self {
        let mut e = Self::new(index, row, probability, exponent);
        e.weight = weight;
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Online,
    Kernel,
    OnlineThenKernel,
    Uniform,
    MatrixP2,
}

impl SamplerMode {
    pub const ALL: [SamplerMode; 5] = [
        SamplerMode::Online,
        SamplerMode::Kernel,
        SamplerMode::OnlineThenKernel,
        SamplerMode::Uniform,
        SamplerMode::MatrixP2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamplerMode::Online => "online",
            SamplerMode::Kernel => "kernel",
            SamplerMode::OnlineThenKernel => "online_then_kernel",
            SamplerMode::Uniform => "uniform",
            SamplerMode::MatrixP2 => "matrix_p2",
        }
    }
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerMode {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        SamplerMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CoresetError::invalid(format!("unknown sampler mode `{s}`")))
    }
}

/// Everything needed to construct a sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    pub p: u32,
    /// Oversampling parameter. For the pipeline this drives the first stage.
    pub r: f64,
    /// Rate of the kernel stage of the pipeline; defaults to `r`.
    pub r_kernel: Option<f64>,
    /// Slack of the p = 2 matrix sampler scores.
    pub eps: f64,
    pub seed: u64,
    /// Stream length, required by the uniform sampler.
    pub n_hint: Option<usize>,
    #[serde(skip, default)]
    pub lift: LiftKind,
    #[serde(skip, default)]
    pub budget: LiftBudget,
}

impl SamplerConfig {
    pub fn new(mode: SamplerMode, p: u32, r: f64, seed: u64) -> Self {
        SamplerConfig {
            mode,
            p,
            r,
            r_kernel: None,
            eps: 0.1,
            seed,
            n_hint: None,
            lift: LiftKind::default(),
            budget: LiftBudget::default(),
        }
    }

    pub fn with_n_hint(mut self, n: usize) -> Self {
        self.n_hint = Some(n);
        self
    }

    pub fn with_kernel_rate(mut self, r: f64) -> Self {
        self.r_kernel = Some(r);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(CoresetError::invalid(format!("p must be >= 2, got {}", self.p)));
        }
        if self.mode == SamplerMode::MatrixP2 && self.p != 2 {
            return Err(CoresetError::invalid("matrix_p2 mode requires p = 2"));
        }
        check_rate(self.r)?;
        if let Some(r) = self.r_kernel {
            check_rate(r)?;
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(CoresetError::invalid("eps must be finite and >= 0"));
        }
        if self.mode == SamplerMode::Uniform && self.n_hint.is_none() {
            return Err(CoresetError::MissingParameter(
                "n_hint (stream length) for uniform sampling",
            ));
        }
        Ok(())
    }

    /// Construct the configured sampler for rows of dimension `dim`.
    pub fn build(&self, dim: usize) -> Result<Box<dyn RowSampler>> {
        self.validate()?;
        Ok(match self.mode {
            SamplerMode::Online => Box::new(OnlineSampler::new(dim, self.p, self.r, self.seed)),
            SamplerMode::Kernel => Box::new(KernelFilter::with_lift(
                dim,
                self.p,
                self.r,
                self.seed,
                self.lift,
                self.budget,
            )?),
            SamplerMode::OnlineThenKernel => Box::new(Pipeline::with_lift(
                dim,
                self.p,
                self.r,
                self.r_kernel.unwrap_or(self.r),
                self.seed,
                self.lift,
                self.budget,
            )?),
            SamplerMode::Uniform => Box::new(UniformSampler::new(
                self.r,
                self.n_hint.expect("validated"),
                self.p,
                self.seed,
            )?),
            SamplerMode::MatrixP2 => Box::new(MatrixSampler::new(dim, self.r, self.eps, self.seed)),
        })
    }
}

pub(crate) fn check_rate(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(CoresetError::invalid(format!(
            "oversampling parameter r must be >= 0, got {r}"
        )));
    }
    Ok(())
}

/// Common interface of the streaming samplers.
pub trait RowSampler {
    /// Feed the next row; returns the entry if the row is retained.
    fn step(&mut self, row: &[f64]) -> Result<Option<CoresetEntry>>;

    fn rows_seen(&self) -> usize;

    /// Sum of the inclusion probabilities assigned so far.
    fn expected_size(&self) -> f64;
}

/// Run a sampler over a whole stream, tagging errors with the row index.
pub fn sample_stream<'a, I>(sampler: &mut dyn RowSampler, rows: I) -> Result<Vec<CoresetEntry>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut kept = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        if let Some(e) = sampler.step(row).map_err(|e| e.at_row(i))? {
            kept.push(e);
        }
    }
    Ok(kept)
}
