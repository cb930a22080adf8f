//! Topic recovery from coresets of a synthetic single-topic corpus.

use serde::{Deserialize, Serialize};

use super::{run_table, BenchSampler, Table};
use crate::error::Result;
use crate::lvm::{fit_topics, matched_l1_error, CorpusConfig, RtpiOptions, SyntheticCorpus, Topic};
use crate::rng::derive_seed;
use crate::sampler::plan::DEFAULT_STAGE1_FACTOR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicBenchConfig {
    pub corpus: CorpusConfig,
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// Order used by the kernel stage.
    pub kernel_p: u32,
    pub restarts: usize,
    pub iterations: usize,
    pub stage1_factor: f64,
    pub seed: u64,
}

impl TopicBenchConfig {
    pub fn desk(seed: u64) -> Self {
        TopicBenchConfig {
            corpus: CorpusConfig {
                seed: derive_seed(seed, "topic-bench/corpus"),
                ..CorpusConfig::default()
            },
            sizes: vec![50, 100, 200, 500, 1000],
            reps: 5,
            kernel_p: 3,
            restarts: 30,
            iterations: 50,
            stage1_factor: DEFAULT_STAGE1_FACTOR,
            seed,
        }
    }

    fn rtpi(&self) -> RtpiOptions {
        RtpiOptions {
            restarts: self.restarts,
            iterations: self.iterations,
            seed: derive_seed(self.seed, "topic-bench/rtpi"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub config: TopicBenchConfig,
    /// Topics fitted on the whole corpus; every cell is matched against them.
    pub reference: Vec<Topic>,
    /// Matched error of the full-corpus fit against the reference (zero up
    /// to round-off; the baseline row).
    pub baseline_error: f64,
    /// Matched error of the full-corpus fit against the generating topics.
    pub generating_topic_error: f64,
    pub table: Table,
}

/// Fit topics on coresets of every (sampler, size) cell and report the
/// median matched `l_1` error against the full-corpus fit. The same power
/// iteration seed is used everywhere so differences come from the samples.
pub fn topic_benchmark(config: &TopicBenchConfig, samplers: Option<Vec<BenchSampler>>) -> Result<TopicReport> {
    let corpus = SyntheticCorpus::generate(&config.corpus)?;
    let k = config.corpus.topics;
    let rtpi = config.rtpi();
    let reference = fit_topics(corpus.docs.iter().map(|d| (d.as_slice(), 1.0)), k, &rtpi, true)?;
    let baseline = fit_topics(corpus.docs.iter().map(|d| (d.as_slice(), 1.0)), k, &rtpi, true)?;
    let baseline_error = matched_l1_error(&baseline, &reference)?;
    let generating: Vec<Topic> = corpus
        .topics
        .iter()
        .zip(&corpus.weights)
        .map(|(t, &w)| Topic {
            weight: w,
            vector: t.clone(),
        })
        .collect();
    let generating_topic_error = matched_l1_error(&reference, &generating)?;
    let samplers = samplers.unwrap_or_else(|| {
        vec![
            BenchSampler::uniform(config.kernel_p),
            BenchSampler::online2(),
            BenchSampler::online_kernel(config.kernel_p),
        ]
    });
    let table = run_table(
        "topic_model",
        &corpus.docs,
        &samplers,
        &config.sizes,
        config.reps,
        config.seed,
        config.stage1_factor,
        |s| {
            let topics = fit_topics(s.entries.iter().map(|e| (e.row.as_slice(), e.weight)), k, &rtpi, true)?;
            matched_l1_error(&topics, &reference)
        },
    );
    Ok(TopicReport {
        config: config.clone(),
        reference,
        baseline_error,
        generating_topic_error,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::SamplerMode;

    #[test]
    fn full_size_cells_equal_baseline() {
        let mut cfg = TopicBenchConfig::desk(3);
        cfg.corpus.docs = 300;
        cfg.corpus.topics = 3;
        cfg.corpus.vocab = 20;
        cfg.corpus.support = 6;
        cfg.sizes = vec![300];
        cfg.reps = 1;
        let samplers = vec![
            BenchSampler::uniform(3),
            BenchSampler::new("online", SamplerMode::Online, 3),
        ];
        let report = topic_benchmark(&cfg, Some(samplers)).unwrap();
        assert!(report.baseline_error < 1e-12);
        for cell in &report.table.cells[0] {
            assert!(cell.median.unwrap() < 1e-8, "{}: {:?}", cell.sampler, cell.median);
        }
    }
}
