//! Online leverage scores `e_i = a_i^T (A_i^T A_i)^† a_i` over a row stream,
//! where `A_i` holds the first `i` rows (including `a_i` itself).

use crate::error::{CoresetError, Result};
use crate::linalg::{
    ensure_finite, norm2, sym_lambda_max, DenseMatrix, PseudoInverseState, UpdateKind, DEFAULT_IN_SPACE_TOL,
};

/// Score of one ingested row. `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverageRecord {
    pub index: usize,
    pub score: f64,
    pub caused_phase_change: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TrackerOptions {
    pub in_space_tol: f64,
    /// Recompute the exact spectral norm every this many rows...
    pub spectral_refresh_every: usize,
    /// ...as long as the rank stays at or below this value.
    pub spectral_refresh_max_rank: usize,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            in_space_tol: DEFAULT_IN_SPACE_TOL,
            spectral_refresh_every: 64,
            spectral_refresh_max_rank: 256,
        }
    }
}

/// Running Gram matrix of a row stream with its pseudo-inverse.
///
/// Single writer: scores depend on arrival order.
#[derive(Debug, Clone)]
pub struct CovarianceTracker {
    state: PseudoInverseState,
    options: TrackerOptions,
    rows_seen: usize,
    phase_changes: usize,
    sherman_morrison_updates: usize,
    leverage_sum: f64,
    min_row_lognorm: f64,
    /// Largest eigenvalue of the Gram matrix at the last exact refresh.
    lambda_at_refresh: f64,
    /// Squared norms of rows ingested since then.
    pending_sq_norm: f64,
    rows_since_refresh: usize,
}

impl CovarianceTracker {
    pub fn new(dim: usize) -> Self {
        Self::with_options(dim, TrackerOptions::default())
    }

    pub fn with_options(dim: usize, options: TrackerOptions) -> Self {
        CovarianceTracker {
            state: PseudoInverseState::with_tolerance(dim, options.in_space_tol),
            options,
            rows_seen: 0,
            phase_changes: 0,
            sherman_morrison_updates: 0,
            leverage_sum: 0.0,
            min_row_lognorm: f64::INFINITY,
            lambda_at_refresh: 0.0,
            pending_sq_norm: 0.0,
            rows_since_refresh: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn ingest(&mut self, a: &[f64]) -> Result<LeverageRecord> {
        if a.len() != self.dim() {
            return Err(CoresetError::DimensionMismatch {
                expected: self.dim(),
                got: a.len(),
            });
        }
        ensure_finite(a)?;
        self.rows_seen += 1;
        let index = self.rows_seen;
        let norm = norm2(a);
        if norm == 0.0 {
            return Ok(LeverageRecord {
                index,
                score: 0.0,
                caused_phase_change: false,
            });
        }
        let outcome = self.state.update(a)?;
        let phase = outcome.kind == UpdateKind::RankIncrease;
        match outcome.kind {
            UpdateKind::RankIncrease => self.phase_changes += 1,
            UpdateKind::ShermanMorrison => self.sherman_morrison_updates += 1,
            UpdateKind::Unchanged => {}
        }
        let score = if phase { 1.0 } else { outcome.leverage.clamp(0.0, 1.0) };
        self.leverage_sum += score;
        self.min_row_lognorm = self.min_row_lognorm.min(norm.ln());

        self.pending_sq_norm += norm * norm;
        self.rows_since_refresh += 1;
        if self.rows_since_refresh >= self.options.spectral_refresh_every
            && self.rank() <= self.options.spectral_refresh_max_rank
        {
            self.refresh_spectral();
        }
        Ok(LeverageRecord {
            index,
            score,
            caused_phase_change: phase,
        })
    }

    /// Recompute the exact largest eigenvalue of the Gram matrix.
    pub fn refresh_spectral(&mut self) {
        self.lambda_at_refresh = sym_lambda_max(&self.state.reduced_matrix());
        self.pending_sq_norm = 0.0;
        self.rows_since_refresh = 0;
    }

    /// Upper bound on `|A_i|`: exact at the last refresh, plus the squared
    /// norms of later rows (Weyl).
    pub fn spectral_upper(&self) -> f64 {
        (self.lambda_at_refresh + self.pending_sq_norm).sqrt()
    }

    /// Exact spectral norm of the rows seen so far.
    pub fn spectral_norm(&self) -> f64 {
        sym_lambda_max(&self.state.reduced_matrix()).sqrt()
    }

    /// `d + 2 d log|A| - 2 min_i log|a_i|`, the leverage-sum bound with an
    /// additive slack of `d`. `None` until a nonzero row has been seen.
    pub fn leverage_sum_bound(&self) -> Option<f64> {
        if !self.min_row_lognorm.is_finite() {
            return None;
        }
        let d = self.dim() as f64;
        Some(d + 2.0 * d * self.spectral_norm().ln() - 2.0 * self.min_row_lognorm)
    }

    pub fn rank(&self) -> usize {
        self.state.rank()
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn phase_changes(&self) -> usize {
        self.phase_changes
    }

    pub fn sherman_morrison_updates(&self) -> usize {
        self.sherman_morrison_updates
    }

    pub fn leverage_sum(&self) -> f64 {
        self.leverage_sum
    }

    pub fn min_row_lognorm(&self) -> f64 {
        self.min_row_lognorm
    }

    pub fn pinv_state(&self) -> &PseudoInverseState {
        &self.state
    }

    /// Materialized `A_i^T A_i`.
    pub fn gram(&self) -> DenseMatrix {
        self.state.matrix()
    }
}
