//! Small dense helpers shared by the filter, the bounds and the schedulers.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Natural log of the determinant of a positive definite matrix.
///
/// Uses an LU factorization with partial pivoting and sums `ln |u_ii|`, so
/// the value stays finite when the determinant itself would underflow.
/// Returns `None` if the determinant is zero or negative.
pub fn log_det(m: &DMatrix<f64>) -> Option<f64> {
    assert!(m.is_square(), "log_det of a non-square matrix");
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let lu = m.clone().lu();
    let mut negative = lu.p().determinant::<f64>() < 0.0;
    let mut acc = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        if d < 0.0 {
            negative = !negative;
        }
        acc += libm::log(libm::fabs(d));
    }
    (!negative).then_some(acc)
}

/// `m <- (m + m^T) / 2`
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Largest `|m_ij - m_ji|`.
pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(libm::fabs(m[(i, j)] - m[(j, i)]));
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(libm::fabs(*v)))
}

/// Smallest and largest eigenvalue of the symmetric part of `m`.
pub fn eigen_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Eigenvalues `(min, max)` of the symmetric part of a 2x2 matrix.
pub fn eigen_extremes2(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mid = 0.5 * (a + d);
    let rad = libm::hypot(0.5 * (a - d), b);
    (mid - rad, mid + rad)
}

/// PSD test with the tolerance used throughout the crate:
/// smallest eigenvalue `>= -1e-9 * max(largest, 0)`.
pub fn is_psd2(m: &Mat2) -> bool {
    let (lo, hi) = eigen_extremes2(m);
    lo >= -PSD_TOLERANCE * hi.max(0.0)
}

pub const PSD_TOLERANCE: f64 = 1e-9;

/// Inverse of a symmetric positive definite 2x2 matrix by the adjugate
/// formula. `None` when the matrix is not positive definite or its
/// condition number exceeds `max_condition`.
pub fn inverse_spd2(m: &Mat2, max_condition: f64) -> Option<Mat2> {
    let (lo, hi) = eigen_extremes2(m);
    if !(lo > 0.0) || hi / lo > max_condition {
        return None;
    }
    Some(adjugate_inverse(m))
}

/// Plain adjugate inverse; caller guarantees invertibility.
pub fn adjugate_inverse(m: &Mat2) -> Mat2 {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

/// Condition number of the symmetric part of a 2x2 matrix; infinite if it
/// is not positive definite.
pub fn condition2(m: &Mat2) -> f64 {
    let (lo, hi) = eigen_extremes2(m);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn block(m: &DMatrix<f64>, i: usize, j: usize) -> Mat2 {
    m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
}

pub fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, value: &Mat2) {
    m.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(value);
}
