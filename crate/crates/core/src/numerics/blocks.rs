use nalgebra::DMatrix;

use super::{ensure_square, symmetrize};
use crate::error::{Error, Result};

/// Submatrix with the given rows and columns, in the given order.
pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn select_square(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    select(m, idx, idx)
}

/// Lower Cholesky factor. Reports the first non-positive pivot.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_square(m, "cholesky")?;
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// `log det m` for a strictly positive definite `m`, as twice the sum of the
/// logs of the Cholesky diagonal.
pub fn log_det_psd(m: &DMatrix<f64>) -> Result<f64> {
    let l = cholesky(&symmetrize(m))?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// `M_kk − M_kc M_cc⁻¹ M_ck`, the covariance of the `keep` block conditioned
/// on the `condition_on` block.
pub fn schur_complement(
    m: &DMatrix<f64>,
    keep: &[usize],
    condition_on: &[usize],
) -> Result<DMatrix<f64>> {
    ensure_square(m, "schur_complement")?;
    let n = m.nrows();
    if keep.iter().chain(condition_on).any(|&i| i >= n) {
        return Err(Error::InvalidArgument(
            "schur_complement: index out of range".into(),
        ));
    }
    if keep.iter().any(|i| condition_on.contains(i)) {
        return Err(Error::InvalidArgument(
            "schur_complement: keep and condition_on overlap".into(),
        ));
    }
    let m_kk = select_square(m, keep);
    if condition_on.is_empty() {
        return Ok(m_kk);
    }
    let m_cc = select_square(m, condition_on);
    let m_kc = select(m, keep, condition_on);
    let l = cholesky(&symmetrize(&m_cc)).map_err(|_| Error::SingularConditioningBlock)?;
    // X = L⁻¹ M_ck, so M_kc M_cc⁻¹ M_ck = Xᵀ X.
    let x = l
        .solve_lower_triangular(&m_kc.transpose())
        .ok_or(Error::SingularConditioningBlock)?;
    Ok(symmetrize(&(m_kk - x.transpose() * x)))
}
