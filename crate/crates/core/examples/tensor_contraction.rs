//! Fourth-order tensor contractions on a 20K x 30 stream with a rare
//! 4-dimensional subspace: uniform vs online leverage vs online + kernel
//! filter at matched expected sizes.
//!
//!     cargo run --release --example tensor_contraction [seed]

use online_coresets::bench::{tensor_benchmark, TensorBenchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let config = TensorBenchConfig::desk(seed);
    let report = tensor_benchmark(&config, None)?;
    println!(
        "{} rows, rank {}, {} rare rows, p = {}",
        config.rows, report.rank, report.rare_rows, config.p
    );
    println!(
        "\nbottom-{} singular directions (median relative error):",
        config.query_count
    );
    print!("{}", report.query_set.to_csv());
    println!("\nsmallest singular direction:");
    print!("{}", report.max_variance.to_csv());
    Ok(())
}
