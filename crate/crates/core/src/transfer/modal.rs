//! Transfer from states into a single eigen-mode.
//!
//! The mode is observed through its projection coordinate `p = C z`, where
//! the rows of `C` recover the mode amplitude from the state: `C = wᵀ/(wᵀw)`
//! for a real right eigenvector `w`, and the pseudo-inverse of `[Re w, Im w]`
//! for a complex pair. `p` is appended to the state,
//!
//! ```text
//! [z; p](t+1) = [A 0; CA 0] [z; p](t) + [I; C] ξ(t)
//! ```
//!
//! and the ordinary transfer formula is applied with `p` as the target.
//! `p(t)` never enters the update, so the augmented system has the same
//! dynamics; only the stationary covariance `[I; C] Σ [I; C]ᵀ` is singular,
//! which the formula tolerates since it only conditions on the target block.
//!
//! The left-eigenvector coordinate `uᵀz` is not usable as a target: its
//! one-step update is `λ uᵀz + uᵀξ`, closed in itself, so every state
//! transfers exactly zero to it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{transfer_with, SubspacePartition, TimeIndex, TransferResult};
use crate::error::{Error, Result};
use crate::lti::{steady_state_covariance, DiscreteLti};
use crate::numerics::{eig_biorthogonal, EigenSystem};

/// Rows of the real projection onto one mode (1 row for a real eigenvalue,
/// 2 for a complex pair).
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTarget {
    pub eigenvalue: Complex64,
    pub projection: DMatrix<f64>,
}

impl ModalTarget {
    pub fn from_eigen(eig: &EigenSystem, mode: usize) -> Result<Self> {
        if mode >= eig.len() {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for {} eigenvalues",
                eig.len()
            )));
        }
        Self::from_vector(eig.values[mode], &eig.right_vector(mode))
    }

    /// Builds the projection from any nonzero (complex) multiple of the right
    /// eigenvector; the result does not depend on the multiple.
    pub fn from_vector(eigenvalue: Complex64, w: &DVector<Complex64>) -> Result<Self> {
        let n = w.len();
        if eigenvalue.im == 0.0 {
            // Undo an arbitrary complex phase before taking the real part.
            let pivot = w
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()));
            let pivot = pivot
                .filter(|p| p.norm() > 0.0)
                .ok_or(Error::SingularEmbedding)?;
            let phase = pivot / pivot.norm();
            let v = DVector::from_iterator(n, w.iter().map(|c| (c / phase).re));
            let vv = v.dot(&v);
            if !(vv > 0.0) {
                return Err(Error::SingularEmbedding);
            }
            return Ok(Self {
                eigenvalue,
                projection: DMatrix::from_row_slice(1, n, (v / vv).as_slice()),
            });
        }
        let mut basis = DMatrix::zeros(n, 2);
        for (k, c) in w.iter().enumerate() {
            basis[(k, 0)] = c.re;
            basis[(k, 1)] = c.im;
        }
        let gram = basis.transpose() * &basis;
        let (g00, g01, g11) = (gram[(0, 0)], gram[(0, 1)], gram[(1, 1)]);
        let det = g00 * g11 - g01 * g01;
        if !(det > 1e-12 * (g00 + g11).powi(2)) {
            return Err(Error::SingularEmbedding);
        }
        let inv = gram.try_inverse().ok_or(Error::SingularEmbedding)?;
        Ok(Self {
            eigenvalue,
            projection: inv * basis.transpose(),
        })
    }

    pub fn rows(&self) -> usize {
        self.projection.nrows()
    }
}

fn augmented(
    sys: &DiscreteLti,
    target: &ModalTarget,
    sigma: &DMatrix<f64>,
) -> Result<[DMatrix<f64>; 3]> {
    let n = sys.dim();
    let c = &target.projection;
    if c.ncols() != n || sigma.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "mode projection has {} columns, covariance is {}x{}, system has {n} states",
            c.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let m = c.nrows();
    let mut a = DMatrix::zeros(n + m, n + m);
    a.view_mut((0, 0), (n, n)).copy_from(sys.a());
    a.view_mut((n, 0), (m, n)).copy_from(&(c * sys.a()));
    let mut g = DMatrix::zeros(n + m, n);
    g.view_mut((0, 0), (n, n)).fill_with_identity();
    g.view_mut((n, 0), (m, n)).copy_from(c);
    let q = &g * sys.q() * g.transpose();
    let s = &g * sigma * g.transpose();
    Ok([a, q, s])
}

/// Transfer from `source` states into the mode coordinate at state
/// covariance `sigma_t`.
pub fn transfer_to_target(
    sys: &DiscreteLti,
    source: &[usize],
    target: &ModalTarget,
    sigma_t: &DMatrix<f64>,
    time: TimeIndex,
) -> Result<TransferResult> {
    let n = sys.dim();
    if let Some(&bad) = source.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidPartition(format!(
            "index {bad} out of range for {n} states"
        )));
    }
    let [a, q, s] = augmented(sys, target, sigma_t)?;
    let target_idx: Vec<usize> = (n..n + target.rows()).collect();
    let part = SubspacePartition::new(n + target.rows(), source, &target_idx)?;
    transfer_with(&a, &q, &part, &s, time)
}

/// Steady-state transfer from `source` states into mode `mode` (index into
/// the sorted spectrum of `A`).
pub fn transfer_to_mode(
    sys: &DiscreteLti,
    source: &[usize],
    mode: usize,
) -> Result<TransferResult> {
    let eig = eig_biorthogonal(sys.a())?;
    let target = ModalTarget::from_eigen(&eig, mode)?;
    let sigma = steady_state_covariance(sys)?;
    transfer_to_target(sys, source, &target, &sigma, TimeIndex::SteadyState)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::discretize;
    use crate::models::participation_counterexample;

    #[test]
    fn diagonal_modes_receive_nothing_from_other_states() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.9, 0.5, -0.3]));
        let sys = DiscreteLti::isotropic(a, 1.0).unwrap();
        let eig = eig_biorthogonal(sys.a()).unwrap();
        for mode in 0..3 {
            let owner = (0..3)
                .find(|&k| eig.right_vector(mode)[k].norm() > 0.5)
                .unwrap();
            for j in (0..3).filter(|&j| j != owner) {
                let r = transfer_to_mode(&sys, &[j], mode).unwrap();
                assert!(r.value.abs() < 1e-12, "z{j} -> mode {mode}: {}", r.value);
            }
        }
    }

    #[test]
    fn counterexample_mode_receives_from_x2() {
        let sys = discretize(&participation_counterexample(), 1.0, 1.0).unwrap();
        let eig = eig_biorthogonal(sys.a()).unwrap();
        // Slowest continuous mode is the largest discrete eigenvalue.
        assert!((eig.values[0].re - (-0.2231f64).exp()).abs() < 1e-4);
        let r = transfer_to_mode(&sys, &[1], 0).unwrap();
        assert!(r.value > 0.1, "{}", r.value);
    }

    #[test]
    fn projection_recovers_mode_amplitude() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, -0.6, 0.1, 0.6, 0.5, 0.0, 0.2, 0.1, 0.3]);
        let eig = eig_biorthogonal(&a).unwrap();
        let t = ModalTarget::from_eigen(&eig, 0).unwrap();
        assert_eq!(t.rows(), 2);
        let w = eig.right_vector(0);
        let re = DVector::from_iterator(3, w.iter().map(|c| c.re));
        let im = DVector::from_iterator(3, w.iter().map(|c| c.im));
        let z = &re * 0.7 - &im * 1.3;
        let p = &t.projection * z;
        assert!((p[0] - 0.7).abs() < 1e-12 && (p[1] + 1.3).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_eigenvector_scaling() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, -0.6, 0.1, 0.6, 0.5, 0.0, 0.2, 0.1, 0.3]);
        let sys = DiscreteLti::isotropic(a, 1.0).unwrap();
        let sigma = steady_state_covariance(&sys).unwrap();
        let eig = eig_biorthogonal(sys.a()).unwrap();
        for mode in [0, 2] {
            let base = ModalTarget::from_eigen(&eig, mode).unwrap();
            let r0 = transfer_to_target(&sys, &[2], &base, &sigma, TimeIndex::SteadyState).unwrap();
            for c in [Complex64::new(-3.0, 0.0), Complex64::new(0.2, 1.7)] {
                let w = eig.right_vector(mode) * c;
                let scaled = ModalTarget::from_vector(eig.values[mode], &w).unwrap();
                let r = transfer_to_target(&sys, &[2], &scaled, &sigma, TimeIndex::SteadyState)
                    .unwrap();
                assert!((r.value - r0.value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bad_mode_index() {
        let sys = DiscreteLti::isotropic(DMatrix::identity(2, 2) * 0.5, 1.0).unwrap();
        assert!(matches!(
            transfer_to_mode(&sys, &[0], 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            transfer_to_mode(&sys, &[5], 0),
            Err(Error::InvalidPartition(_))
        ));
    }
}
