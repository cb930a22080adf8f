//! One-sided Jacobi SVD. Used instead of `nalgebra`'s bidiagonal SVD, which
//! returns inaccurate factors on some rank-deficient inputs.

use super::DenseMatrix;

const MAX_SWEEPS: usize = 80;

/// Factor an n×d matrix with `n >= d` as `U diag(s) V^T`. Returns `U` (n×d,
/// columns with zero singular value are left as zero), the unsorted
/// singular values and `V` (d×d).
pub(super) fn one_sided_jacobi(mut a: DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let (n, d) = a.shape();
    debug_assert!(n >= d);
    let mut v = DenseMatrix::identity(d, d);
    let tol = f64::EPSILON * (n as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..d {
            for j in (i + 1)..d {
                let (alpha, beta, gamma) = {
                    let ci = a.column(i);
                    let cj = a.column(j);
                    (ci.norm_squared(), cj.norm_squared(), ci.dot(&cj))
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = Vec::with_capacity(d);
    for j in 0..d {
        let norm = a.column(j).norm();
        sigma.push(norm);
        if norm > 0.0 {
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    (a, sigma, v)
}

fn rotate(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let n = m.nrows();
    let data = m.as_mut_slice();
    let (lo, hi) = data.split_at_mut(j * n);
    let ci = &mut lo[i * n..(i + 1) * n];
    let cj = &mut hi[..n];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}
