//! Explicit tensor-power lifts: degree-k products of a vector become inner
//! products of lifted vectors, `<lift(x), lift(y)> = (x^T y)^k`.

use crate::error::{CoresetError, Result};

/// Upper limit on the number of entries of one lifted row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftBudget(pub u128);

pub const DEFAULT_LIFT_BUDGET: LiftBudget = LiftBudget(1_000_000);

impl Default for LiftBudget {
    fn default() -> Self {
        DEFAULT_LIFT_BUDGET
    }
}

impl LiftBudget {
    pub fn check(&self, what: &str, requested: u128) -> Result<()> {
        if requested > self.0 {
            Err(CoresetError::Capacity {
                what: what.to_string(),
                requested,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// `d^k`, or `None` on overflow.
pub fn lifted_dim(d: usize, k: u32) -> Option<u128> {
    (d as u128).checked_pow(k)
}

/// `vec(x ⊗ ... ⊗ x)` with `k` factors. The entry at multi-index
/// `(i_1, ..., i_k)` sits at `i_1 d^{k-1} + ... + i_k` and equals the
/// product of the indexed coordinates.
pub fn kron_power(x: &[f64], k: u32, budget: LiftBudget) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(CoresetError::invalid("kron_power exponent must be >= 1"));
    }
    let d = x.len();
    let dim = lifted_dim(d, k).unwrap_or(u128::MAX);
    budget.check(&format!("kron_power(d={d}, k={k})"), dim)?;
    let mut out = x.to_vec();
    for _ in 1..k {
        let mut next = Vec::with_capacity(out.len() * d);
        for &a in &out {
            next.extend(x.iter().map(|&b| a * b));
        }
        out = next;
    }
    Ok(out)
}

/// Number of multisets of size `k` drawn from `d` symbols.
pub fn sym_power_dim(d: usize, k: u32) -> Option<u128> {
    // C(d + k - 1, k)
    let n = d as u128 + k as u128 - 1;
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c.checked_mul(n - i)? / (i + 1);
    }
    Some(c)
}

/// Isometric compression of `kron_power` onto the symmetric subspace: one
/// coordinate per multiset `i_1 <= ... <= i_k`, scaled by the square root of
/// its multinomial multiplicity. Inner products of lifts are identical to
/// those of `kron_power`, with roughly `k!` times fewer coordinates.
pub fn sym_power(x: &[f64], k: u32, budget: LiftBudget) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(CoresetError::invalid("sym_power exponent must be >= 1"));
    }
    let d = x.len();
    let dim = sym_power_dim(d, k).unwrap_or(u128::MAX);
    budget.check(&format!("sym_power(d={d}, k={k})"), dim)?;
    if k == 1 {
        return Ok(x.to_vec());
    }
    let mut out = Vec::with_capacity(dim as usize);
    let k_factorial: f64 = (1..=k).map(f64::from).product();
    fill_sym(x, k as usize, 0, usize::MAX, 0, 1.0, 1.0, k_factorial, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fill_sym(
    x: &[f64],
    remaining: usize,
    start: usize,
    last: usize,
    run: usize,
    product: f64,
    inv_multiplicity: f64,
    k_factorial: f64,
    out: &mut Vec<f64>,
) {
    if remaining == 0 {
        out.push((k_factorial * inv_multiplicity).sqrt() * product);
        return;
    }
    for i in start..x.len() {
        let (r, inv) = if i == last {
            (run + 1, inv_multiplicity / (run + 1) as f64)
        } else {
            (1, inv_multiplicity)
        };
        fill_sym(x, remaining - 1, i, i, r, product * x[i], inv, k_factorial, out);
    }
}
