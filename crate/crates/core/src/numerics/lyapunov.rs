use nalgebra::{DMatrix, DVector};

use super::{ensure_finite, ensure_square, min_symmetric_eigenvalue, spectral_radius, symmetrize};
use crate::error::{Error, Result};

/// Largest dimension solved through the Kronecker-vectorized linear system.
const DIRECT_MAX_DIM: usize = 24;
const STABILITY_MARGIN: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 200;

/// `‖AΣAᵀ + Q − Σ‖_F / ‖Σ‖_F`.
pub fn lyapunov_residual(a: &DMatrix<f64>, q: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    let r = a * sigma * a.transpose() + q - sigma;
    r.norm() / sigma.norm().max(f64::MIN_POSITIVE)
}

/// Solves `Σ = AΣAᵀ + Q` for Schur-stable `A` and positive semidefinite `Q`.
///
/// Small systems are solved directly as `(I − A⊗A) vec Σ = vec Q`; larger
/// ones by the doubling iteration `Σ ← Σ + A_k Σ A_kᵀ, A_k ← A_k²`, which sums
/// the series `Σ_k A^k Q (Aᵀ)^k` in logarithmically many steps.
pub fn solve_discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_square(a, "solve_discrete_lyapunov")?;
    ensure_finite(a, "solve_discrete_lyapunov")?;
    if q.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Q is {}x{}, A is {}x{}",
            q.nrows(),
            q.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let q_scale = q.amax().max(f64::MIN_POSITIVE);
    if min_symmetric_eigenvalue(q) < -1e-12 * q_scale {
        return Err(Error::InvalidArgument(
            "Q is not positive semidefinite".into(),
        ));
    }
    let rho = spectral_radius(a)?;
    if rho >= 1.0 - STABILITY_MARGIN {
        return Err(Error::UnstableSystem {
            spectral_radius: rho,
        });
    }

    let n = a.nrows();
    let mut sigma = if n <= DIRECT_MAX_DIM {
        direct(a, q)?
    } else {
        doubling(a, q)
    };
    // Two fixed-point sweeps remove the last rounding drift from either path.
    for _ in 0..2 {
        sigma = symmetrize(&(a * &sigma * a.transpose() + q));
    }
    Ok(sigma)
}

fn direct(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let nn = n * n;
    // Column-major vec: vec(A Σ Aᵀ) = (A ⊗ A) vec Σ.
    let kron = a.kronecker(a);
    let lhs = DMatrix::<f64>::identity(nn, nn) - kron;
    let rhs = DVector::from_iterator(nn, q.iter().copied());
    let sol = lhs.lu().solve(&rhs).ok_or(Error::UnstableSystem {
        spectral_radius: 1.0,
    })?;
    Ok(symmetrize(&DMatrix::from_column_slice(
        n,
        n,
        sol.as_slice(),
    )))
}

fn doubling(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut sigma = q.clone();
    let mut ak = a.clone();
    for _ in 0..MAX_DOUBLINGS {
        let increment = &ak * &sigma * ak.transpose();
        let inc_norm = increment.amax();
        sigma += increment;
        if inc_norm <= f64::EPSILON * 1e-2 * sigma.amax() {
            break;
        }
        ak = &ak * &ak;
    }
    symmetrize(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dynamics_returns_q() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let s = solve_discrete_lyapunov(&DMatrix::zeros(2, 2), &q).unwrap();
        assert!((s - q).amax() < 1e-15);
    }

    #[test]
    fn diagonal_geometric_series() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.9, 0.1]));
        let sigma2 = 2.5;
        let q = DMatrix::from_diagonal_element(3, 3, sigma2);
        let s = solve_discrete_lyapunov(&a, &q).unwrap();
        for (i, ai) in [0.5f64, -0.9, 0.1].iter().enumerate() {
            assert!((s[(i, i)] - sigma2 / (1.0 - ai * ai)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_target_variance() {
        let a = DMatrix::from_row_slice(2, 2, &[0.7, 1.0, 0.0, 0.5]);
        let s = solve_discrete_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((s[(1, 1)] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unstable_rejected() {
        let a = DMatrix::from_diagonal_element(2, 2, 1.0);
        assert!(matches!(
            solve_discrete_lyapunov(&a, &DMatrix::identity(2, 2)),
            Err(Error::UnstableSystem { .. })
        ));
    }

    #[test]
    fn doubling_agrees_with_direct() {
        // Same problem embedded above the direct-solve size limit.
        let n = DIRECT_MAX_DIM + 6;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.6
            } else if j == i + 1 {
                0.3
            } else {
                0.0
            }
        });
        let q = DMatrix::identity(n, n);
        let big = solve_discrete_lyapunov(&a, &q).unwrap();
        assert!(lyapunov_residual(&a, &q, &big) < 1e-12);
        let small = direct(&a, &q).unwrap();
        assert!((big - small).amax() < 1e-10);
    }
}
