//! Online sensitivity sampling of a Gaussian stream, one row at a time.
//! Prints the running leverage and sensitivity of the first rows, then the
//! coreset size and the error of a few contractions.
//!
//!     cargo run --release --example online_sampling [p] [r]

use online_coresets::bench::gaussian_stream;
use online_coresets::eval::{contract_entries, contract_rows, ContractMode, QuerySet};
use online_coresets::sampler::OnlineSampler;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let r: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000.0);
    let rows = gaussian_stream(5000, 6, 1);

    let mut sampler = OnlineSampler::new(6, p, r, 1);
    let mut coreset = Vec::new();
    println!("row  leverage  sensitivity  probability");
    for (i, a) in rows.iter().enumerate() {
        let score = sampler.score(a)?;
        if i < 10 {
            println!(
                "{i:>3}  {:>8.4}  {:>11.4}  {:>11.4}",
                score.leverage.score,
                score.sensitivity,
                score.probability(r)
            );
        }
        if let Some(e) = sampler.decide(a, &score) {
            coreset.push(e);
        }
    }
    println!(
        "\nkept {} of {} rows, sensitivity sum {:.1}",
        coreset.len(),
        rows.len(),
        sampler.sensitivity_sum()
    );

    let queries = QuerySet::random_unit(6, 5, 9)?;
    for x in &queries.vectors {
        let full = contract_rows(&rows, x, p, ContractMode::Absolute)?;
        let est = contract_entries(&coreset, x, p, ContractMode::Absolute)?;
        println!(
            "sum |a^T x|^{p}: full {full:>10.2}  coreset {est:>10.2}  ratio {:.3}",
            est / full
        );
    }
    Ok(())
}
