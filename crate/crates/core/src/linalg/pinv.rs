//! Incrementally maintained pseudo-inverse of a growing PSD matrix
//! `M = sum_i x_i x_i^T`.
//!
//! The state keeps an orthonormal basis `Q` (k×d) of the column space of `M`
//! together with the reduced matrix `K = Q M Q^T` and its inverse `G`, so that
//! `M^† = Q^T G Q`. A vector inside the column space updates `G` with the
//! Sherman-Morrison formula
//!
//! ```text
//! (M + x x^T)^† = M^† - M^† x x^T M^† / (1 + x^T M^† x)
//! ```
//!
//! written in reduced coordinates `y = Q x`. A vector with a residual outside
//! the column space augments the basis and grows `G` by one row and column
//! using the block inverse of the bordered reduced matrix.

use super::{dot, ensure_finite, norm2, sym_eigen_desc, DenseMatrix, DEFAULT_RANK_TOL};
use crate::error::{CoresetError, Result};

/// Relative residual `|x - P x| / |x|` under which `x` counts as lying in the
/// column space.
pub const DEFAULT_IN_SPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    /// Zero vector; nothing changed.
    Unchanged,
    /// Rank-preserving Sherman-Morrison update.
    ShermanMorrison,
    /// Vector left the column space; rank grew by one.
    RankIncrease,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    pub kind: UpdateKind,
    /// `x^T (M + x x^T)^† x` for the updated matrix.
    pub leverage: f64,
}

/// Square row-major buffer with spare capacity so that appending a row and
/// column does not copy the whole matrix every time.
#[derive(Debug, Clone, Default)]
struct SquareBuf {
    n: usize,
    cap: usize,
    data: Vec<f64>,
}

impl SquareBuf {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cap..i * self.cap + self.n]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * self.cap..i * self.cap + n]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cap + j]
    }

    fn grow(&mut self) {
        if self.n == self.cap {
            let cap = (self.cap * 2).max(8);
            let mut data = vec![0.0; cap * cap];
            for i in 0..self.n {
                data[i * cap..i * cap + self.n].copy_from_slice(self.row(i));
            }
            self.cap = cap;
            self.data = data;
        }
        self.n += 1;
        let n = self.n;
        let cap = self.cap;
        for i in 0..n {
            self.data[i * cap + n - 1] = 0.0;
            self.data[(n - 1) * cap + i] = 0.0;
        }
    }

    fn set_border(&mut self, col: &[f64], corner: f64) {
        let last = self.n - 1;
        let cap = self.cap;
        for (i, &c) in col.iter().enumerate() {
            self.data[i * cap + last] = c;
            self.data[last * cap + i] = c;
        }
        self.data[last * cap + last] = corner;
    }

    fn matvec(&self, y: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.n).map(|i| dot(self.row(i), y)));
    }

    /// `self += alpha * v v^T`
    fn rank_one(&mut self, alpha: f64, v: &[f64]) {
        for i in 0..self.n {
            let s = alpha * v[i];
            for (e, &vj) in self.row_mut(i).iter_mut().zip(v) {
                *e += s * vj;
            }
        }
    }

    fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

#[derive(Debug, Clone)]
pub struct PseudoInverseState {
    dim: usize,
    /// Row `r` holds the `r`-th orthonormal basis vector.
    basis: Vec<f64>,
    reduced: SquareBuf,
    reduced_inv: SquareBuf,
    in_space_tol: f64,
}

impl PseudoInverseState {
    /// State tracking the zero matrix of size `dim`.
    pub fn empty(dim: usize) -> Self {
        Self::with_tolerance(dim, DEFAULT_IN_SPACE_TOL)
    }

    pub fn with_tolerance(dim: usize, in_space_tol: f64) -> Self {
        PseudoInverseState {
            dim,
            basis: Vec::new(),
            reduced: SquareBuf::default(),
            reduced_inv: SquareBuf::default(),
            in_space_tol,
        }
    }

    /// Start from an explicit PSD matrix (eigenvalues below
    /// `DEFAULT_RANK_TOL * lambda_max` are dropped).
    pub fn from_psd(m: &DenseMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(CoresetError::invalid("PSD matrix must be square"));
        }
        ensure_finite(m.as_slice())?;
        let dim = m.nrows();
        let mut state = Self::empty(dim);
        if dim == 0 {
            return Ok(state);
        }
        let (vals, vecs) = sym_eigen_desc(m);
        let cutoff = DEFAULT_RANK_TOL * vals[0].max(0.0);
        for (c, &lambda) in vals.iter().enumerate() {
            if lambda <= cutoff || lambda <= 0.0 {
                break;
            }
            state.basis.extend(vecs.column(c).iter());
            state.reduced.grow();
            state.reduced_inv.grow();
            let zeros = vec![0.0; state.reduced.n - 1];
            state.reduced.set_border(&zeros, lambda);
            state.reduced_inv.set_border(&zeros, 1.0 / lambda);
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.reduced.n
    }

    #[inline]
    fn basis_row(&self, r: usize) -> &[f64] {
        &self.basis[r * self.dim..(r + 1) * self.dim]
    }

    /// Coordinates of `x` in the basis plus the out-of-space residual, using
    /// a second Gram-Schmidt pass when cancellation is significant.
    fn project(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let k = self.rank();
        let mut y: Vec<f64> = (0..k).map(|r| dot(self.basis_row(r), x)).collect();
        let mut z = x.to_vec();
        for (r, &c) in y.iter().enumerate() {
            axpy(-c, self.basis_row(r), &mut z);
        }
        let mut znorm = norm2(&z);
        if k > 0 && znorm < 0.5 * norm2(x) {
            let y2: Vec<f64> = (0..k).map(|r| dot(self.basis_row(r), &z)).collect();
            for (r, &c) in y2.iter().enumerate() {
                axpy(-c, self.basis_row(r), &mut z);
                y[r] += c;
            }
            znorm = norm2(&z);
        }
        (y, z, znorm)
    }

    /// Replace `M` by `M + x x^T`.
    pub fn update(&mut self, x: &[f64]) -> Result<UpdateOutcome> {
        if x.len() != self.dim {
            return Err(CoresetError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        ensure_finite(x)?;
        let xnorm = norm2(x);
        if xnorm == 0.0 {
            return Ok(UpdateOutcome {
                kind: UpdateKind::Unchanged,
                leverage: 0.0,
            });
        }
        let (y, z, znorm) = self.project(x);
        let mut g = Vec::with_capacity(y.len());
        self.reduced_inv.matvec(&y, &mut g);
        let q = dot(&y, &g);

        if znorm <= self.in_space_tol * xnorm {
            self.reduced_inv.rank_one(-1.0 / (1.0 + q), &g);
            self.reduced.rank_one(1.0, &y);
            return Ok(UpdateOutcome {
                kind: UpdateKind::ShermanMorrison,
                leverage: q / (1.0 + q),
            });
        }

        // Bordered reduced matrix [[K + y y^T, s y], [s y^T, s^2]] has inverse
        // [[G, -G y / s], [-(G y)^T / s, (1 + q) / s^2]].
        let s = znorm;
        self.reduced.rank_one(1.0, &y);
        self.reduced.grow();
        let col: Vec<f64> = y.iter().map(|v| s * v).collect();
        self.reduced.set_border(&col, s * s);

        self.reduced_inv.grow();
        let col: Vec<f64> = g.iter().map(|v| -v / s).collect();
        self.reduced_inv.set_border(&col, (1.0 + q) / (s * s));

        self.basis.extend(z.iter().map(|v| v / s));
        Ok(UpdateOutcome {
            kind: UpdateKind::RankIncrease,
            leverage: 1.0,
        })
    }

    /// `x^T M^† x` (the component of `x` outside the column space is ignored).
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = (0..self.rank()).map(|r| dot(self.basis_row(r), x)).collect();
        let mut g = Vec::with_capacity(y.len());
        self.reduced_inv.matvec(&y, &mut g);
        dot(&y, &g)
    }

    /// Orthonormal column-space basis as a d×k matrix.
    pub fn column_basis(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim, self.rank(), |i, r| self.basis[r * self.dim + i])
    }

    /// Materialized `M^†` (d×d).
    pub fn pinv(&self) -> DenseMatrix {
        let q = self.column_basis();
        &q * self.reduced_inv.to_matrix() * q.transpose()
    }

    /// Materialized tracked matrix `M` (d×d).
    pub fn matrix(&self) -> DenseMatrix {
        let q = self.column_basis();
        &q * self.reduced.to_matrix() * q.transpose()
    }

    /// `Q M Q^T`, which has the same nonzero spectrum as `M`.
    pub fn reduced_matrix(&self) -> DenseMatrix {
        self.reduced.to_matrix()
    }
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pinv, DEFAULT_RANK_TOL};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn e(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    fn outer(x: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(x.len(), x.len(), |i, j| x[i] * x[j])
    }

    #[test]
    fn repeated_direction_halves() {
        let mut st = PseudoInverseState::from_psd(&outer(&e(2, 0))).unwrap();
        let out = st.update(&e(2, 0)).unwrap();
        assert_eq!(out.kind, UpdateKind::ShermanMorrison);
        assert!((out.leverage - 0.5).abs() < 1e-15);
        let p = st.pinv();
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(p[(1, 1)].abs() < 1e-15 && p[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn zero_vector_leaves_state_unchanged() {
        let mut st = PseudoInverseState::from_psd(&DenseMatrix::identity(2, 2)).unwrap();
        let out = st.update(&[0.0, 0.0]).unwrap();
        assert_eq!(out.kind, UpdateKind::Unchanged);
        assert!((st.pinv() - DenseMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_vector_increases_rank() {
        let mut st = PseudoInverseState::from_psd(&outer(&e(2, 0))).unwrap();
        assert_eq!(st.rank(), 1);
        let out = st.update(&e(2, 1)).unwrap();
        assert_eq!(out.kind, UpdateKind::RankIncrease);
        assert_eq!(out.leverage, 1.0);
        assert_eq!(st.rank(), 2);
        assert!((st.pinv() - DenseMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let mut st = PseudoInverseState::empty(3);
        assert!(matches!(
            st.update(&[1.0, 2.0]),
            Err(CoresetError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn matches_svd_pseudo_inverse_on_random_psd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let d = 6;
            let rank = 1 + trial % d;
            let basis = DenseMatrix::from_fn(d, rank, |_, _| StandardNormal.sample(&mut rng));
            let mut st = PseudoInverseState::empty(d);
            let mut m = DenseMatrix::zeros(d, d);
            for _ in 0..(rank + 5) {
                let c = nalgebra::DVector::from_fn(rank, |_, _| StandardNormal.sample(&mut rng));
                let x: Vec<f64> = (&basis * c).iter().copied().collect();
                st.update(&x).unwrap();
                m += outer(&x);
                let want = pinv(&m, DEFAULT_RANK_TOL).unwrap();
                let err = (st.pinv() - &want).norm() / want.norm();
                assert!(err < 1e-8, "trial {trial}: relative error {err}");
            }
            assert_eq!(st.rank(), rank);
            let recon = (st.matrix() - &m).norm() / m.norm();
            assert!(recon < 1e-12);
        }
    }
}
