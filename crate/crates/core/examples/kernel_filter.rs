//! Kernel filter scores for p = 3 and p = 4 on a stream whose last rows
//! leave the span of the earlier ones.
//!
//!     cargo run --release --example kernel_filter

use online_coresets::sampler::KernelFilter;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 200 rows in the first two coordinates, then three rows along e3.
    let mut rows: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let t = i as f64 * 0.37;
            vec![t.cos(), t.sin(), 0.0]
        })
        .collect();
    rows.extend([vec![0.0, 0.0, 1.0], vec![0.1, 0.0, 1.0], vec![0.0, 0.2, 0.9]]);

    for p in [3u32, 4] {
        let mut filter = KernelFilter::new(3, p, 10.0, 5)?;
        let mut kept = Vec::new();
        for (i, a) in rows.iter().enumerate() {
            let s = filter.score(a)?;
            if i >= 198 {
                println!(
                    "p={p} row {i}: low {:.4} high {:.4} score {:.4}",
                    s.low, s.high, s.score
                );
            }
            if let Some(e) = filter.decide(i, a, &s) {
                kept.push(e.index);
            }
        }
        println!(
            "p={p}: kept {} rows, last three kept: {:?}\n",
            kept.len(),
            &kept[kept.len().saturating_sub(3)..]
        );
    }
    Ok(())
}
