//! p = 2 spectral approximation: matrix sampler, merge-and-reduce and
//! uniform sampling at the same expected size.
//!
//!     cargo run --release --example spectral_p2 [eps, default 0.5]

use online_coresets::bench::{spectral_benchmark, SpectralBenchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SpectralBenchConfig::desk(6);
    // At the bench default of 0.25 the nominal size exceeds the 2000 rows
    // and every sampler keeps everything.
    config.eps = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let report = spectral_benchmark(&config)?;
    println!(
        "{} x {}, eps {}, nominal size {:.0}, matched size {:.0}, {} runs",
        config.rows,
        config.dim,
        config.eps,
        report.nominal_size,
        config.matched_size(),
        config.runs
    );
    print!("{}", report.to_csv());
    Ok(())
}
