//! Small dense helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Tolerance for accepting `Pi0` as a symmetric involution.
pub const INVOLUTION_TOL: f64 = 1e-12;

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn symmetry_defect(m: &Matrix) -> f64 {
    max_abs_diff(m, &m.transpose())
}

/// Checks that `pi0` is a real `d x d` matrix with `pi0 = pi0^T` and `pi0^2 = I`.
pub fn check_involution(pi0: &Matrix, d: usize) -> Result<()> {
    if pi0.nrows() != d || pi0.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: pi0.nrows().max(pi0.ncols()),
        });
    }
    let residual = symmetry_defect(pi0).max(max_abs_diff(&(pi0 * pi0), &Matrix::identity(d, d)));
    if residual.is_nan() || residual > INVOLUTION_TOL {
        return Err(Error::NotInvolution { residual });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> alloc::vec::Vec<f64> {
    let mut ev: alloc::vec::Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `d^n` with overflow reported as a capacity error.
pub fn tensor_dim(d: usize, n: usize) -> Result<usize> {
    let mut out: usize = 1;
    for _ in 0..n {
        out = out.checked_mul(d).ok_or(Error::Capacity {
            what: "tensor dimension",
            requested: u128::MAX,
            limit: usize::MAX as u128,
        })?;
    }
    Ok(out)
}

/// Named involutions used by tests and the CLI.
pub mod involutions {
    use super::Matrix;

    pub fn identity(d: usize) -> Matrix {
        Matrix::identity(d, d)
    }

    /// `diag(1, -1, -1, ...)`.
    pub fn flip(d: usize) -> Matrix {
        let mut m = Matrix::identity(d, d);
        for i in 1..d {
            m[(i, i)] = -1.0;
        }
        m
    }

    /// Transposes the first two basis vectors, fixes the others.
    pub fn swap12(d: usize) -> Matrix {
        let mut m = Matrix::identity(d, d);
        if d >= 2 {
            m[(0, 0)] = 0.0;
            m[(1, 1)] = 0.0;
            m[(0, 1)] = 1.0;
            m[(1, 0)] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Matrix {
        Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
    }
}
