use crate::error::{CoresetError, Result};

/// Rate `r` solving `sum_i min(1, r * c_i) = target` for score coefficients
/// `c_i` (an infinite coefficient means the row is always kept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSolution {
    pub rate: f64,
    /// Expected size at `rate`; differs from the target only when the target
    /// is out of reach.
    pub expected: f64,
    /// Every row with a positive coefficient is kept with certainty.
    pub saturated: bool,
}

/// Exact solve of the piecewise-linear equation by sorting the coefficients.
pub fn rate_for_expected_size(coefficients: &[f64], target: f64) -> Result<RateSolution> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(CoresetError::invalid(format!(
            "target size must be finite and >= 0, got {target}"
        )));
    }
    let forced = coefficients.iter().filter(|c| c.is_infinite()).count() as f64;
    let mut finite: Vec<f64> = coefficients
        .iter()
        .copied()
        .filter(|c| c.is_finite() && *c > 0.0)
        .collect();
    if coefficients.iter().any(|c| c.is_nan()) {
        return Err(CoresetError::invalid("NaN score coefficient"));
    }
    finite.sort_by(|a, b| b.total_cmp(a));
    let m = finite.len();
    if target <= forced || m == 0 {
        return Ok(RateSolution {
            rate: 0.0,
            expected: forced,
            saturated: m == 0,
        });
    }
    if target >= forced + m as f64 {
        return Ok(RateSolution {
            rate: 1.0 / finite[m - 1],
            expected: forced + m as f64,
            saturated: true,
        });
    }
    let rest = target - forced;
    // suffix[j] = sum of finite[j..]
    let mut suffix = vec![0.0; m + 1];
    for j in (0..m).rev() {
        suffix[j] = suffix[j + 1] + finite[j];
    }
    // The first j coefficients are clamped at probability one.
    for j in 0..m {
        let r = (rest - j as f64) / suffix[j];
        if r * finite[j] <= 1.0 && (j == 0 || r * finite[j - 1] >= 1.0) {
            return Ok(RateSolution {
                rate: r,
                expected: target,
                saturated: false,
            });
        }
    }
    // Rounding can leave every bracket marginally violated; fall back to
    // bisection on the monotone expected size.
    let size = |r: f64| forced + finite.iter().map(|c| (r * c).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0 / finite[m - 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if size(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RateSolution {
        rate: hi,
        expected: size(hi),
        saturated: false,
    })
}

/// Oversampling rate for online sensitivity sampling with failure probability
/// `delta` per query and relative error `eps`: `2 k S ln(1/delta) / eps^2`,
/// where `S` is the sensitivity sum. The sum is only known at the end of the
/// stream, so passing a running value gives a heuristic.
pub fn online_rate_for_guarantee(k: f64, sensitivity_sum: f64, eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    Ok(2.0 * k * sensitivity_sum * (1.0 / delta).ln() / (eps * eps))
}

/// Oversampling rate for the kernel filter: `(2 + eps/3) ln(1/delta) / eps^2`,
/// read off the exponential tail bound of the filter's guarantee.
pub fn kernel_rate_for_guarantee(eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    Ok((2.0 + eps / 3.0) * (1.0 / delta).ln() / (eps * eps))
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CoresetError::invalid(format!("eps must be positive, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoresetError::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}
