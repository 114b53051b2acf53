//! Non-symmetric eigen-decomposition with biorthonormal left/right vectors.
//!
//! Eigenvalues come from the real Schur form. Right eigenvectors are the
//! null space of `A − λI` (SVD), computed once per cluster of numerically
//! coincident eigenvalues so that semisimple repeated eigenvalues get a full
//! basis. Left eigenvectors are the rows of `W⁻¹`, which makes the pair
//! biorthonormal by construction.

use std::cmp::Ordering;

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{ensure_finite, ensure_square};
use crate::error::{Error, Result};

/// Eigenvalue condition numbers above this are treated as defective.
const MAX_EIGVEC_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Sorted by descending real part, then descending imaginary part.
    pub values: Vec<Complex64>,
    /// Column `i` is the right eigenvector `w_i` (unit 2-norm).
    pub right: DMatrix<Complex64>,
    /// Row `i` is the left eigenvector `u_i`, with `u_i w_j = δ_ij`.
    pub left: DMatrix<Complex64>,
    pub spectral_radius: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn right_vector(&self, i: usize) -> DVector<Complex64> {
        self.right.column(i).into_owned()
    }

    pub fn left_vector(&self, i: usize) -> DVector<Complex64> {
        self.left.row(i).transpose()
    }

    /// `Σ λ_i w_i u_i`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(self.values.clone()));
        debug_assert_eq!(lambda.nrows(), n);
        &self.right * lambda * &self.left
    }

    /// Largest `‖u_i‖‖w_i‖`; 1 for normal matrices.
    pub fn max_condition(&self) -> f64 {
        (0..self.len())
            .map(|i| self.left.row(i).norm() * self.right.column(i).norm())
            .fold(0.0, f64::max)
    }

    /// Index of the eigenvalue with the largest real part.
    pub fn rightmost(&self) -> usize {
        0
    }

    /// Index of the eigenvalue with the largest modulus (first on ties).
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > self.values[best].norm() {
                best = i;
            }
        }
        best
    }

    /// Index of the conjugate partner of a complex eigenvalue.
    pub fn conjugate_partner(&self, i: usize) -> Option<usize> {
        let v = self.values[i];
        if v.im == 0.0 {
            return None;
        }
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .find(|(_, w)| w.re == v.re && w.im == -v.im)
            .map(|(j, _)| j)
    }
}

fn descending(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

fn schur_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::EigenNoConvergence)?;
    let scale = a.amax().max(1.0);
    let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    // Conjugate pairs come from 2x2 blocks; make them exact mirror images so
    // that ordering and pairing are deterministic.
    for v in values.iter_mut() {
        if v.im.abs() <= 1e-14 * scale {
            v.im = 0.0;
        }
    }
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] || values[i].im <= 0.0 {
            continue;
        }
        let target = values[i].conj();
        let partner = (0..values.len())
            .filter(|&j| !used[j] && j != i && values[j].im < 0.0)
            .min_by(|&p, &q| {
                (values[p] - target)
                    .norm()
                    .partial_cmp(&(values[q] - target).norm())
                    .unwrap_or(Ordering::Equal)
            });
        if let Some(j) = partner {
            let re = 0.5 * (values[i].re + values[j].re);
            let im = 0.5 * (values[i].im - values[j].im);
            values[i] = Complex64::new(re, im);
            values[j] = Complex64::new(re, -im);
            used[i] = true;
            used[j] = true;
        }
    }
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::EigenNoConvergence);
    }
    Ok(values)
}

/// Eigenvalues sorted by descending real part, then descending imaginary part.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    ensure_square(a, "eigenvalues")?;
    ensure_finite(a, "eigenvalues")?;
    let mut values = schur_eigenvalues(a)?;
    values.sort_by(descending);
    Ok(values)
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// Null space basis of `m` of the requested dimension (columns), from the
/// right singular vectors of the smallest singular values.
fn complex_null_space(
    m: DMatrix<Complex64>,
    dim: usize,
    tol: f64,
) -> Option<Vec<DVector<Complex64>>> {
    let n = m.ncols();
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap_or(Ordering::Equal)
    });
    let picked = &order[..dim];
    if picked.iter().any(|&k| svd.singular_values[k] > tol) {
        return None;
    }
    Some(
        picked
            .iter()
            .map(|&k| v_t.row(k).transpose().map(|z| z.conj()))
            .collect(),
    )
}

fn real_null_space(m: DMatrix<f64>, dim: usize, tol: f64) -> Option<Vec<DVector<f64>>> {
    let n = m.ncols();
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap_or(Ordering::Equal)
    });
    let picked = &order[..dim];
    if picked.iter().any(|&k| svd.singular_values[k] > tol) {
        return None;
    }
    Some(picked.iter().map(|&k| v_t.row(k).transpose()).collect())
}

/// Fix the phase so the largest-magnitude component is real and positive.
fn normalize_phase(v: &mut DVector<Complex64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        v.apply(|z| *z *= phase);
    }
    let norm = v.norm();
    if norm > 0.0 {
        v.apply(|z| *z /= norm);
    }
}

/// Eigenvalues with biorthonormal left and right eigenvectors.
///
/// Fails with [`Error::DefectiveMatrix`] when the eigenvector basis is
/// (numerically) incomplete.
pub fn eig_biorthogonal(a: &DMatrix<f64>) -> Result<EigenSystem> {
    ensure_square(a, "eig_biorthogonal")?;
    ensure_finite(a, "eig_biorthogonal")?;
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    let cluster_tol = 1e-8 * scale;
    let null_tol = 1e-7 * scale;

    let mut values = schur_eigenvalues(a)?;
    values.sort_by(descending);

    let mut vectors: Vec<Option<DVector<Complex64>>> = vec![None; n];
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] || values[i].im < 0.0 {
            continue;
        }
        let members: Vec<usize> = (0..n)
            .filter(|&j| {
                !assigned[j]
                    && (values[j] - values[i]).norm() <= cluster_tol
                    && (values[j].im == 0.0) == (values[i].im == 0.0)
            })
            .collect();
        let k = members.len();
        let mean = members.iter().map(|&j| values[j]).sum::<Complex64>() / k as f64;
        let basis: Vec<DVector<Complex64>> = if mean.im == 0.0 {
            let shifted = a - DMatrix::<f64>::identity(n, n) * mean.re;
            real_null_space(shifted, k, null_tol)
                .ok_or(Error::DefectiveMatrix {
                    condition: f64::INFINITY,
                })?
                .into_iter()
                .map(|v| v.map(|x| Complex64::new(x, 0.0)))
                .collect()
        } else {
            let shifted =
                a.map(|x| Complex64::new(x, 0.0)) - DMatrix::<Complex64>::identity(n, n) * mean;
            complex_null_space(shifted, k, null_tol).ok_or(Error::DefectiveMatrix {
                condition: f64::INFINITY,
            })?
        };
        for (&j, mut v) in members.iter().zip(basis) {
            if k == 1 {
                normalize_phase(&mut v);
            } else {
                let norm = v.norm();
                v /= Complex64::new(norm, 0.0);
            }
            if values[j].im != 0.0 {
                // Conjugate partner gets the conjugate vector.
                let partner = (0..n).find(|&p| {
                    !assigned[p]
                        && p != j
                        && values[p].re == values[j].re
                        && values[p].im == -values[j].im
                });
                if let Some(p) = partner {
                    vectors[p] = Some(v.map(|z| z.conj()));
                    assigned[p] = true;
                }
            }
            vectors[j] = Some(v);
            assigned[j] = true;
        }
    }

    let mut right = DMatrix::<Complex64>::zeros(n, n);
    for (j, v) in vectors.into_iter().enumerate() {
        let v = v.ok_or(Error::DefectiveMatrix {
            condition: f64::INFINITY,
        })?;
        right.set_column(j, &v);
    }
    let left = right.clone().try_inverse().ok_or(Error::DefectiveMatrix {
        condition: f64::INFINITY,
    })?;

    // Two-sided Rayleigh quotients tighten the Schur eigenvalues.
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let aw = &ac * &right;
    for i in 0..n {
        let refined = (left.row(i) * aw.column(i))[(0, 0)];
        if (refined - values[i]).norm() <= cluster_tol.max(1e-10 * scale) {
            let keep_real = values[i].im == 0.0;
            values[i] = if keep_real {
                Complex64::new(refined.re, 0.0)
            } else {
                refined
            };
        }
    }
    // Keep conjugate pairs exact after refinement.
    for i in 0..n {
        if values[i].im > 0.0 {
            if let Some(p) = (0..n).find(|&p| {
                p != i
                    && (values[p] - values[i].conj()).norm() <= cluster_tol.max(1e-10 * scale)
                    && values[p].im < 0.0
            }) {
                values[p] = values[i].conj();
            }
        }
    }

    let system = EigenSystem {
        spectral_radius: values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        values,
        right,
        left,
    };
    let condition = system.max_condition();
    if !(condition <= MAX_EIGVEC_CONDITION) {
        return Err(Error::DefectiveMatrix { condition });
    }
    Ok(system)
}
