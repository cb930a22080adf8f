//! Benchmark scenarios comparing samplers at matched expected sizes.
//!
//! Every cell (sampler, size) is repeated with derived seeds and summarized
//! by its median; failures are counted per cell instead of aborting the run.

mod spectral;
mod tensor;
mod topic;

pub use spectral::{
    gaussian_stream, merge_reduce_p2, spectral_benchmark, SpectralBenchConfig, SpectralReport, SpectralRow,
};
pub use tensor::{tensor_benchmark, TensorBenchConfig, TensorData, TensorReport};
pub use topic::{topic_benchmark, TopicBenchConfig, TopicReport};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::derive_seed;
use crate::sampler::plan::{sample_to_expected_size, PlannedSample};
use crate::sampler::{SamplerConfig, SamplerMode};

/// A sampler column of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSampler {
    pub label: String,
    pub mode: SamplerMode,
    pub p: u32,
}

impl BenchSampler {
    pub fn new(label: &str, mode: SamplerMode, p: u32) -> Self {
        BenchSampler {
            label: label.to_string(),
            mode,
            p,
        }
    }

    pub fn uniform(p: u32) -> Self {
        Self::new("uniform", SamplerMode::Uniform, p)
    }

    /// Online leverage sampling (`p = 2` sensitivities).
    pub fn online2() -> Self {
        Self::new("online(2)", SamplerMode::Online, 2)
    }

    pub fn online_kernel(p: u32) -> Self {
        Self::new("online+kernel", SamplerMode::OnlineThenKernel, p)
    }

    /// Draw a sample of the given expected size.
    pub fn sample<R: AsRef<[f64]>>(
        &self,
        rows: &[R],
        size: f64,
        seed: u64,
        stage1_factor: f64,
    ) -> Result<PlannedSample> {
        let cfg = SamplerConfig::new(self.mode, self.p, 1.0, seed);
        sample_to_expected_size(rows, &cfg, size, stage1_factor)
    }
}

/// Uniform, online(2) and online + kernel filter.
pub fn default_samplers(kernel_p: u32) -> Vec<BenchSampler> {
    vec![
        BenchSampler::uniform(kernel_p),
        BenchSampler::online2(),
        BenchSampler::online_kernel(kernel_p),
    ]
}

/// Summary of the repetitions of one (sampler, size) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub sampler: String,
    pub size: usize,
    pub values: Vec<f64>,
    /// Median of `values`; `None` when every repetition failed.
    pub median: Option<f64>,
    pub failures: usize,
    pub mean_kept: f64,
}

/// Rows are sizes, columns samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub samplers: Vec<String>,
    pub sizes: Vec<usize>,
    /// `cells[size_index][sampler_index]`.
    pub cells: Vec<Vec<Cell>>,
}

impl Table {
    pub fn median(&self, size_index: usize, sampler: &str) -> Option<f64> {
        let j = self.samplers.iter().position(|s| s == sampler)?;
        self.cells[size_index][j].median
    }

    /// CSV with one row per size and the medians as columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size");
        for s in &self.samplers {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (i, size) in self.sizes.iter().enumerate() {
            let _ = write!(out, "{size}");
            for c in &self.cells[i] {
                match c.median {
                    Some(m) => {
                        let _ = write!(out, ",{m:.6}");
                    }
                    None => out.push_str(",failed"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Run `reps` repetitions of every (sampler, size) cell. `metric` receives the
/// sample and returns the error of that repetition.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_table<R, F>(
    name: &str,
    rows: &[R],
    samplers: &[BenchSampler],
    sizes: &[usize],
    reps: usize,
    seed: u64,
    stage1_factor: f64,
    mut metric: F,
) -> Table
where
    R: AsRef<[f64]>,
    F: FnMut(&PlannedSample) -> Result<f64>,
{
    let mut cells = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut row = Vec::with_capacity(samplers.len());
        for s in samplers {
            let mut values = Vec::with_capacity(reps);
            let mut failures = 0;
            let mut kept = 0usize;
            for rep in 0..reps {
                let cell_seed = derive_seed(seed, &format!("{name}/{}/{size}/{rep}", s.label));
                let outcome = s
                    .sample(rows, size as f64, cell_seed, stage1_factor)
                    .and_then(|sample| {
                        kept += sample.entries.len();
                        metric(&sample)
                    });
                match outcome {
                    Ok(v) if v.is_finite() => values.push(v),
                    Ok(v) => {
                        log::warn!("{name}: {} at size {size} rep {rep} gave {v}", s.label);
                        failures += 1;
                    }
                    Err(e) => {
                        log::warn!("{name}: {} at size {size} rep {rep} failed: {e}", s.label);
                        failures += 1;
                    }
                }
            }
            row.push(Cell {
                sampler: s.label.clone(),
                size,
                median: median(&values),
                values,
                failures,
                mean_kept: kept as f64 / reps.max(1) as f64,
            });
        }
        cells.push(row);
    }
    Table {
        name: name.to_string(),
        samplers: samplers.iter().map(|s| s.label.clone()).collect(),
        sizes: sizes.to_vec(),
        cells,
    }
}

/// Median (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
