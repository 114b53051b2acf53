//! Dense linear-algebra kernels shared by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. Symmetric positive (semi)definite
//! inputs are checked at the point where the property matters rather than
//! wrapped in a separate type.

mod blocks;
mod eigen;
mod expm;
mod jacobian;
mod lyapunov;

pub use blocks::{cholesky, log_det_psd, schur_complement, select, select_square};
pub use eigen::{eig_biorthogonal, eigenvalues, spectral_radius, EigenSystem};
pub use expm::matrix_exponential;
pub use jacobian::{numerical_jacobian, numerical_jacobian_scaled};
pub use lyapunov::{lyapunov_residual, solve_discrete_lyapunov};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) fn ensure_square(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn ensure_finite(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what}: non-finite entry")));
    }
    Ok(())
}

/// Maximum absolute column sum.
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(a + aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetrize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
