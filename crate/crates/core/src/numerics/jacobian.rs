use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Central-difference Jacobian of `f` at `x` with step `h`.
///
/// Probe `2j` is `x + h e_j`, probe `2j + 1` is `x − h e_j`; a non-finite
/// value at either is reported with that probe index.
pub fn numerical_jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    central_differences(f, x, |_| h)
}

/// Same as [`numerical_jacobian`] with per-component step
/// `rel · max(1, |x_j|)`.
pub fn numerical_jacobian_scaled<F>(f: F, x: &DVector<f64>, rel: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !(rel > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be > 0, got {rel}"
        )));
    }
    central_differences(f, x, |v| rel * v.abs().max(1.0))
}

fn central_differences<F, H>(f: F, x: &DVector<f64>, step: H) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    H: Fn(f64) -> f64,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    let mut probe = x.clone();
    for j in 0..n {
        let xj = x[j];
        let h = step(xj);
        probe[j] = xj + h;
        let fp = f(&probe);
        if fp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation { probe: 2 * j });
        }
        probe[j] = xj - h;
        let fm = f(&probe);
        if fm.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation { probe: 2 * j + 1 });
        }
        probe[j] = xj;
        if fp.len() != fm.len() {
            return Err(Error::DimensionMismatch(
                "vector field changed output length".into(),
            ));
        }
        cols.push((fp - fm) / (2.0 * h));
    }
    let m = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(m, n, |i, j| cols[j][i]))
}
