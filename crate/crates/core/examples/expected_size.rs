//! Solving for the sampling rate that gives a target expected coreset size,
//! for every sampler mode.
//!
//!     cargo run --release --example expected_size [target]

use online_coresets::bench::gaussian_stream;
use online_coresets::sampler::plan::sample_to_expected_size;
use online_coresets::sampler::{SamplerConfig, SamplerMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200.0);
    let rows = gaussian_stream(10_000, 8, 3);
    println!("mode                rate        kernel rate  expected  sd     kept");
    for mode in [
        SamplerMode::Online,
        SamplerMode::Kernel,
        SamplerMode::OnlineThenKernel,
        SamplerMode::Uniform,
        SamplerMode::MatrixP2,
    ] {
        let p = if mode == SamplerMode::MatrixP2 { 2 } else { 3 };
        let cfg = SamplerConfig::new(mode, p, 1.0, 3);
        let plan = sample_to_expected_size(&rows, &cfg, target, 2.0)?;
        println!(
            "{:<18}  {:<10.4}  {:<11}  {:<8.1}  {:<5.1}  {}",
            mode.to_string(),
            plan.rate,
            plan.kernel_rate
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "-".into()),
            plan.expected_size,
            plan.variance.sqrt(),
            plan.entries.len()
        );
    }
    Ok(())
}
