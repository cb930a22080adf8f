//! Merge-and-reduce streaming over weighted point sets.
//!
//! Level 0 is a raw buffer of capacity `M`. A full buffer is reduced with
//! budget `rho_0` into a level-1 coreset; whenever a coreset lands on an
//! occupied level `j` the two are merged and reduced with `rho_j` and the
//! result carried to level `j + 1`. After `n` pushes the occupied levels are
//! the set bits of `floor(n / M)` (bit `b` is level `b + 1`) plus the buffer
//! when `n mod M != 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::linalg::{ensure_finite, sym_power, sym_power_dim, DenseMatrix, LiftBudget, PseudoInverseState};
use crate::rng::{bernoulli, rng_from, SeededRng};
use crate::sampler::rate_for_expected_size;

/// Schedule constant `2 pi^2 / 3`: the product of `1 + rho_j` over all levels
/// is then below `exp(eps / 4) <= 1 + eps / 2` for `eps <= 2.5`.
pub const DEFAULT_SCHEDULE_C: f64 = 2.0 * PI * PI / 3.0;

/// Per-level error budgets `rho_j = eps / (c (j + 1)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSchedule {
    pub epsilon: f64,
    pub c: f64,
}

impl ErrorSchedule {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_constant(epsilon, DEFAULT_SCHEDULE_C)
    }

    pub fn with_constant(epsilon: f64, c: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(CoresetError::invalid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(CoresetError::invalid(format!(
                "schedule constant must be positive, got {c}"
            )));
        }
        Ok(ErrorSchedule { epsilon, c })
    }

    pub fn rho(&self, level: usize) -> f64 {
        let j = (level + 1) as f64;
        self.epsilon / (self.c * j * j)
    }

    /// `prod_{j=0..=max_level} (1 + rho_j)`.
    pub fn product(&self, max_level: usize) -> f64 {
        (0..=max_level).map(|j| 1.0 + self.rho(j)).product()
    }

    /// Whether the product stays below `1 + eps/2` for every level a stream
    /// of `2^log2_n` points can reach.
    pub fn holds_up_to(&self, log2_n: u32) -> bool {
        self.product(log2_n as usize) <= 1.0 + self.epsilon / 2.0
    }

    /// Smallest constant for which [`holds_up_to`](Self::holds_up_to) is true,
    /// found by bisection.
    pub fn smallest_constant(epsilon: f64, log2_n: u32) -> Result<f64> {
        let ok = |c: f64| ErrorSchedule::with_constant(epsilon, c).map(|s| s.holds_up_to(log2_n));
        let (mut lo, mut hi) = (1e-6, 1.0);
        while !ok(hi)? {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// A point with a multiplicity weight. `index` is the stream position of the
/// raw point it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub index: usize,
    pub row: Vec<f64>,
    pub weight: f64,
}

impl WeightedPoint {
    pub fn new(index: usize, row: Vec<f64>, weight: f64) -> Self {
        WeightedPoint { index, row, weight }
    }
}

/// Offline coreset construction plugged into the tree.
pub trait Reducer {
    /// Reduce `points` with error budget `rho`. `level` is the level whose
    /// overflow is being reduced.
    fn reduce(&mut self, points: Vec<WeightedPoint>, rho: f64, level: usize) -> Result<Vec<WeightedPoint>>;
}

impl<F> Reducer for F
where
    F: FnMut(Vec<WeightedPoint>, f64, usize) -> Result<Vec<WeightedPoint>>,
{
    fn reduce(&mut self, points: Vec<WeightedPoint>, rho: f64, level: usize) -> Result<Vec<WeightedPoint>> {
        self(points, rho, level)
    }
}

/// Size the default reducer aims for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceTarget {
    /// Expected output size independent of the budget.
    Fixed(usize),
    /// `kappa * D * ln(D) / rho^2` with `D` the lifted dimension (at least 2
    /// is used inside the logarithm).
    FromRho { kappa: f64 },
}

impl ReduceTarget {
    pub fn size(&self, lifted_dim: usize, rho: f64) -> f64 {
        match *self {
            ReduceTarget::Fixed(m) => m as f64,
            ReduceTarget::FromRho { kappa } => {
                let d = lifted_dim.max(2) as f64;
                kappa * d * d.ln() / (rho * rho)
            }
        }
    }
}

/// Offline lifted-leverage sensitivity sampling. Rows are scaled by
/// `w^(1/p)`, lifted to degrees `floor(p/2)` and `ceil(p/2)`, scored by
/// `sqrt` of the product of their exact leverage scores, and kept
/// independently with probability `min(1, t s_i)` where `t` makes the
/// expected size equal to the target. Kept weights are divided by the
/// inclusion probability.
#[derive(Debug, Clone)]
pub struct DefaultReducer {
    p: u32,
    target: ReduceTarget,
    budget: LiftBudget,
    rng: SeededRng,
}

impl DefaultReducer {
    pub fn new(p: u32, target: ReduceTarget, seed: u64) -> Result<Self> {
        if p < 2 {
            return Err(CoresetError::invalid(format!("p must be >= 2, got {p}")));
        }
        Ok(DefaultReducer {
            p,
            target,
            budget: LiftBudget::default(),
            rng: rng_from(seed, "merge-reduce"),
        })
    }

    /// Batch lifted-leverage scores of a weighted set.
    pub fn scores(&self, points: &[WeightedPoint]) -> Result<Vec<f64>> {
        let exponent = 1.0 / f64::from(self.p);
        let scaled: Vec<Vec<f64>> = points
            .iter()
            .map(|q| {
                let s = q.weight.powf(exponent);
                q.row.iter().map(|v| v * s).collect()
            })
            .collect();
        let k_low = self.p / 2;
        let k_high = self.p.div_ceil(2);
        let low = self.batch_leverage(&scaled, k_low)?;
        if k_low == k_high {
            return Ok(low);
        }
        let high = self.batch_leverage(&scaled, k_high)?;
        Ok(low
            .iter()
            .zip(&high)
            .map(|(a, b)| (a.sqrt() * b.sqrt()).min(1.0))
            .collect())
    }

    fn batch_leverage(&self, rows: &[Vec<f64>], k: u32) -> Result<Vec<f64>> {
        let lifted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| sym_power(r, k, self.budget))
            .collect::<Result<_>>()?;
        let dim = lifted.first().map_or(0, Vec::len);
        let mut gram = DenseMatrix::zeros(dim, dim);
        for x in &lifted {
            let v = nalgebra::DVectorView::from_slice(x, dim);
            gram.syger(1.0, &v, &v, 1.0);
        }
        gram.fill_upper_triangle_with_lower_triangle();
        let state = PseudoInverseState::from_psd(&gram)?;
        Ok(lifted.iter().map(|x| state.quad_form(x).clamp(0.0, 1.0)).collect())
    }
}

impl Reducer for DefaultReducer {
    fn reduce(&mut self, points: Vec<WeightedPoint>, rho: f64, _level: usize) -> Result<Vec<WeightedPoint>> {
        if points.is_empty() {
            return Ok(points);
        }
        let d = points[0].row.len();
        let dim = sym_power_dim(d, self.p.div_ceil(2)).unwrap_or(u128::MAX);
        let target = self.target.size(dim.min(usize::MAX as u128) as usize, rho);
        if target >= points.len() as f64 {
            return Ok(points);
        }
        let scores = self.scores(&points)?;
        if scores.iter().all(|&s| s == 0.0) {
            return Ok(points);
        }
        let t = rate_for_expected_size(&scores, target)?.rate;
        let mut out = Vec::new();
        for (q, s) in points.into_iter().zip(scores) {
            let prob = (t * s).min(1.0);
            if bernoulli(&mut self.rng, prob) {
                out.push(WeightedPoint {
                    weight: q.weight / prob,
                    ..q
                });
            }
        }
        Ok(out)
    }
}

/// Occupied levels predicted by the binary counter after `n` pushes into a
/// tree with bucket capacity `capacity` (0 stands for a non-empty buffer).
pub fn expected_occupancy(n: usize, capacity: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if n % capacity != 0 {
        out.push(0);
    }
    let blocks = n / capacity;
    out.extend(
        (0..usize::BITS as usize)
            .filter(|b| blocks >> b & 1 == 1)
            .map(|b| b + 1),
    );
    out
}

/// Binary-counter merge-and-reduce tree.
pub struct MergeReduceTree<R: Reducer> {
    capacity: usize,
    schedule: ErrorSchedule,
    reducer: R,
    buffer: Vec<WeightedPoint>,
    /// `levels[j]` holds the coreset of level `j + 1`.
    levels: Vec<Option<Vec<WeightedPoint>>>,
    pushed: usize,
    reductions: usize,
    largest_bucket: usize,
}

impl<R: Reducer> MergeReduceTree<R> {
    pub fn new(capacity: usize, schedule: ErrorSchedule, reducer: R) -> Result<Self> {
        if capacity == 0 {
            return Err(CoresetError::invalid("bucket capacity must be positive"));
        }
        Ok(MergeReduceTree {
            capacity,
            schedule,
            reducer,
            buffer: Vec::with_capacity(capacity),
            levels: Vec::new(),
            pushed: 0,
            reductions: 0,
            largest_bucket: 0,
        })
    }

    pub fn push(&mut self, point: WeightedPoint) -> Result<()> {
        ensure_finite(&point.row)?;
        if !(point.weight.is_finite() && point.weight > 0.0) {
            return Err(CoresetError::invalid(format!(
                "weight must be positive, got {}",
                point.weight
            )));
        }
        self.buffer.push(point);
        self.pushed += 1;
        if self.buffer.len() == self.capacity {
            let full = std::mem::replace(&mut self.buffer, Vec::with_capacity(self.capacity));
            let reduced = self.reduce(full, 0)?;
            self.carry(reduced, 1)?;
        }
        Ok(())
    }

    /// Push a raw row with unit weight; its index is the push count.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        let index = self.pushed;
        self.push(WeightedPoint::new(index, row.to_vec(), 1.0))
            .map_err(|e| e.at_row(index))
    }

    fn reduce(&mut self, points: Vec<WeightedPoint>, level: usize) -> Result<Vec<WeightedPoint>> {
        self.reductions += 1;
        let rho = self.schedule.rho(level);
        let out = self.reducer.reduce(points, rho, level)?;
        self.largest_bucket = self.largest_bucket.max(out.len());
        Ok(out)
    }

    fn carry(&mut self, mut set: Vec<WeightedPoint>, mut level: usize) -> Result<()> {
        loop {
            let slot = level - 1;
            if self.levels.len() <= slot {
                self.levels.resize_with(slot + 1, || None);
            }
            match self.levels[slot].take() {
                None => {
                    self.levels[slot] = Some(set);
                    return Ok(());
                }
                Some(mut existing) => {
                    existing.append(&mut set);
                    set = self.reduce(existing, level)?;
                    level += 1;
                }
            }
        }
    }

    /// Occupied levels in increasing order; 0 stands for a non-empty buffer.
    pub fn occupied_levels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.buffer.is_empty() {
            out.push(0);
        }
        out.extend(
            self.levels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.is_some())
                .map(|(j, _)| j + 1),
        );
        out
    }

    pub fn pushed(&self) -> usize {
        self.pushed
    }

    pub fn reductions(&self) -> usize {
        self.reductions
    }

    pub fn largest_bucket(&self) -> usize {
        self.largest_bucket
    }

    pub fn bucket_sizes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if !self.buffer.is_empty() {
            out.push((0, self.buffer.len()));
        }
        for (j, l) in self.levels.iter().enumerate() {
            if let Some(l) = l {
                out.push((j + 1, l.len()));
            }
        }
        out
    }

    pub fn schedule(&self) -> &ErrorSchedule {
        &self.schedule
    }

    /// Union of the buffer and all occupied levels, without a final reduce.
    pub fn finalize(self) -> Vec<WeightedPoint> {
        let mut out = self.buffer;
        for set in self.levels.into_iter().flatten() {
            out.extend(set);
        }
        out
    }
}
