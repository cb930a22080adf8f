//! Synthetic single-topic corpora: every document draws one topic and then
//! its words independently from that topic's word distribution.

use rand::distributions::WeightedIndex;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub docs: usize,
    pub vocab: usize,
    pub topics: usize,
    /// Document lengths are uniform on `min_len..=max_len`.
    pub min_len: usize,
    pub max_len: usize,
    /// Number of words carrying a topic's mass.
    pub support: usize,
    /// Topic `i` has prior weight proportional to `decay^i`.
    pub decay: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            docs: 10_000,
            vocab: 100,
            topics: 12,
            min_len: 50,
            max_len: 150,
            support: 15,
            decay: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    /// `l_1`-normalized word-count vectors.
    pub docs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Word distributions, one per topic.
    pub topics: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SyntheticCorpus {
    pub fn generate(config: &CorpusConfig) -> Result<Self> {
        let c = config;
        if c.topics == 0 || c.vocab == 0 || c.support == 0 || c.support > c.vocab {
            return Err(CoresetError::invalid(
                "corpus needs topics, vocabulary and 1 <= support <= vocab",
            ));
        }
        if c.min_len == 0 || c.min_len > c.max_len {
            return Err(CoresetError::invalid(
                "document lengths must satisfy 1 <= min_len <= max_len",
            ));
        }
        if !(c.decay > 0.0 && c.decay <= 1.0) {
            return Err(CoresetError::invalid("topic weight decay must lie in (0, 1]"));
        }
        let mut rng = rng_from(c.seed, "corpus/topics");
        let topics: Vec<Vec<f64>> = (0..c.topics)
            .map(|_| {
                let mut t = vec![0.0; c.vocab];
                for w in sample(&mut rng, c.vocab, c.support).iter() {
                    let g: f64 = Exp1.sample(&mut rng);
                    t[w] = g + 0.05;
                }
                let s: f64 = t.iter().sum();
                t.iter_mut().for_each(|v| *v /= s);
                t
            })
            .collect();
        let raw: Vec<f64> = (0..c.topics).map(|i| c.decay.powi(i as i32)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

        let topic_dist = WeightedIndex::new(&weights).map_err(|e| CoresetError::invalid(e.to_string()))?;
        let word_dists: Vec<WeightedIndex<f64>> = topics
            .iter()
            .map(|t| WeightedIndex::new(t).map_err(|e| CoresetError::invalid(e.to_string())))
            .collect::<Result<_>>()?;
        let mut rng = rng_from(c.seed, "corpus/docs");
        let mut docs = Vec::with_capacity(c.docs);
        let mut labels = Vec::with_capacity(c.docs);
        for _ in 0..c.docs {
            let z = topic_dist.sample(&mut rng);
            let len = rng.gen_range(c.min_len..=c.max_len);
            let mut counts = vec![0.0; c.vocab];
            for _ in 0..len {
                counts[word_dists[z].sample(&mut rng)] += 1.0;
            }
            counts.iter_mut().for_each(|v| *v /= len as f64);
            docs.push(counts);
            labels.push(z);
        }
        Ok(SyntheticCorpus {
            docs,
            labels,
            topics,
            weights,
        })
    }
}
