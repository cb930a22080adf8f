//! Merge-and-reduce over a 20K-row stream with the default lifted-leverage
//! reducer. Shows the occupied levels as the stream grows and the spectral
//! error of the final p = 2 summary.
//!
//!     cargo run --release --example merge_reduce

use online_coresets::bench::gaussian_stream;
use online_coresets::eval::spectral_check;
use online_coresets::sampler::CoresetEntry;
use online_coresets::stream::{DefaultReducer, ErrorSchedule, MergeReduceTree, ReduceTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = gaussian_stream(20_000, 5, 11);
    let schedule = ErrorSchedule::new(0.2)?;
    println!(
        "schedule: c = {:.3}, prod(1 + rho_j) up to 2^40 points = {:.6}",
        schedule.c,
        schedule.product(40)
    );

    let reducer = DefaultReducer::new(2, ReduceTarget::Fixed(400), 11)?;
    let mut tree = MergeReduceTree::new(500, schedule, reducer)?;
    for (i, a) in rows.iter().enumerate() {
        tree.push_row(a)?;
        if (i + 1) % 4000 == 0 {
            println!("{:>6} rows: occupied levels {:?}", i + 1, tree.occupied_levels());
        }
    }
    println!(
        "{} reductions, largest bucket {}",
        tree.reductions(),
        tree.largest_bucket()
    );
    let summary = tree.finalize();
    let entries: Vec<CoresetEntry> = summary
        .iter()
        .map(|q| CoresetEntry::new(q.index, q.row.clone(), 1.0 / q.weight, 2))
        .collect();
    println!(
        "{} weighted points, ||C^T C - A^T A|| / ||A^T A|| = {:.4}",
        entries.len(),
        spectral_check(&rows, &entries)?
    );
    Ok(())
}
