//! Checking an l_p subspace embedding over an eps-net of the row space.
//!
//!     cargo run --release --example embedding_check [p] [size]

use online_coresets::bench::gaussian_stream;
use online_coresets::eval::{epsilon_net, row_space_basis, verify_embedding};
use online_coresets::sampler::plan::sample_to_expected_size;
use online_coresets::sampler::{SamplerConfig, SamplerMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let size: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1500.0);
    let rows = gaussian_stream(20_000, 3, 4);

    let net = epsilon_net(&row_space_basis(&rows, 3)?, 0.2, p, 4)?;
    println!("net of {} unit vectors in a 3-dimensional row space", net.len());
    for mode in [SamplerMode::Online, SamplerMode::OnlineThenKernel, SamplerMode::Uniform] {
        let plan = sample_to_expected_size(&rows, &SamplerConfig::new(mode, p, 1.0, 4), size, 2.0)?;
        let report = verify_embedding(&rows, &plan.entries, p, 0.2, &net)?;
        println!(
            "{:<18} kept {:>5}  max |ratio - 1| = {:.4}  within 0.2: {}",
            mode.to_string(),
            plan.entries.len(),
            report.max_deviation,
            report.passed
        );
    }
    Ok(())
}
