//! Single-topic model fitted on a streamed coreset of a synthetic corpus,
//! compared with the fit on every document.
//!
//!     cargo run --release --example topic_model [size]

use online_coresets::lvm::{fit_topics, matched_l1_error, CorpusConfig, RtpiOptions, SyntheticCorpus};
use online_coresets::sampler::plan::sample_to_expected_size;
use online_coresets::sampler::{SamplerConfig, SamplerMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let size: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1000.0);
    let corpus = SyntheticCorpus::generate(&CorpusConfig {
        docs: 5000,
        seed: 2,
        ..CorpusConfig::default()
    })?;
    let k = corpus.topics.len();
    let options = RtpiOptions::new(2);

    let full = fit_topics(corpus.docs.iter().map(|d| (d.as_slice(), 1.0)), k, &options, true)?;
    let truth: Vec<_> = corpus
        .topics
        .iter()
        .zip(&corpus.weights)
        .map(|(v, w)| online_coresets::lvm::Topic {
            weight: *w,
            vector: v.clone(),
        })
        .collect();
    println!(
        "full corpus ({} docs): matched l1 to generating topics {:.3}",
        corpus.docs.len(),
        matched_l1_error(&full, &truth)?
    );

    for mode in [SamplerMode::Uniform, SamplerMode::Online, SamplerMode::OnlineThenKernel] {
        let p = if mode == SamplerMode::Online { 2 } else { 3 };
        let plan = sample_to_expected_size(&corpus.docs, &SamplerConfig::new(mode, p, 1.0, 2), size, 2.0)?;
        let fitted = fit_topics(
            plan.entries.iter().map(|e| (e.row.as_slice(), e.weight)),
            k,
            &options,
            true,
        )?;
        println!(
            "{:<18} {:>5} docs: matched l1 to full fit {:.3}",
            mode.to_string(),
            plan.entries.len(),
            matched_l1_error(&fitted, &full)?
        );
    }
    Ok(())
}
