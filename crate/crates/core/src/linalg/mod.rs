//! Dense linear algebra primitives shared by the samplers and evaluators.
//!
//! Eigendecompositions and QR come from `nalgebra`; the SVD is a one-sided
//! Jacobi sweep on the triangular QR factor. Pieces specific to online
//! leverage tracking (rank-one pseudo-inverse updates, tensor lifts) live in
//! the submodules.

mod jacobi;
mod lift;
mod pinv;

pub use lift::{kron_power, lifted_dim, sym_power, sym_power_dim, LiftBudget, DEFAULT_LIFT_BUDGET};
pub use pinv::{PseudoInverseState, UpdateKind, UpdateOutcome, DEFAULT_IN_SPACE_TOL};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{CoresetError, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Singular values below `DEFAULT_RANK_TOL * sigma_max` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Thin SVD truncated to numerical rank. `u` is n×k, `v` is d×k and the
/// singular values are sorted in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactorization {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let sigma = DenseMatrix::from_diagonal(&DenseVector::from_vec(self.singular_values.clone()));
        &self.u * sigma * self.v.transpose()
    }
}

pub fn ensure_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(CoresetError::invalid(format!(
            "non-finite value {} at position {i}",
            values[i]
        ))),
    }
}

/// Thin SVD with relative rank cutoff `rank_tol`.
pub fn svd(a: &DenseMatrix, rank_tol: f64) -> Result<SvdFactorization> {
    ensure_finite(a.as_slice())?;
    let (n, d) = a.shape();
    if n == 0 || d == 0 {
        return Ok(SvdFactorization {
            u: DenseMatrix::zeros(n, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(d, 0),
        });
    }
    if n < d {
        let t = svd(&a.transpose(), rank_tol)?;
        return Ok(SvdFactorization {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (u, sigma, v) = if n > d {
        let qr = a.clone().qr();
        let (ur, sigma, v) = jacobi::one_sided_jacobi(qr.r());
        (qr.q() * ur, sigma, v)
    } else {
        jacobi::one_sided_jacobi(a.clone())
    };
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let sigma_max = order.first().map(|&i| sigma[i]).unwrap_or(0.0);
    let cutoff = rank_tol * sigma_max;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| sigma[i] > cutoff && sigma[i] > 0.0)
        .collect();
    let k = kept.len();
    let mut uk = DenseMatrix::zeros(n, k);
    let mut vk = DenseMatrix::zeros(d, k);
    let mut values = Vec::with_capacity(k);
    for (c, &i) in kept.iter().enumerate() {
        uk.set_column(c, &u.column(i));
        vk.set_column(c, &v.column(i));
        values.push(sigma[i]);
    }
    Ok(SvdFactorization {
        u: uk,
        singular_values: values,
        v: vk,
    })
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    svd(a, 0.0)
        .map(|f| f.singular_values.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
pub fn sym_eigen_desc(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut vecs = DenseMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
        vals.push(eig.eigenvalues[i]);
    }
    (vals, vecs)
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix.
pub fn sym_lambda_max(m: &DenseMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    sym_eigen_desc(m).0[0].max(0.0)
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub fn pinv(a: &DenseMatrix, rank_tol: f64) -> Result<DenseMatrix> {
    let f = svd(a, rank_tol)?;
    let inv = DenseVector::from_iterator(f.rank(), f.singular_values.iter().map(|s| 1.0 / s));
    Ok(&f.v * DenseMatrix::from_diagonal(&inv) * f.u.transpose())
}

/// Matrix whose rows are the given vectors.
pub fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(CoresetError::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

pub fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators keep the loop vectorizable
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
