use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SubspacePartition;
use crate::error::{Error, Result};
use crate::lti::DiscreteLti;
use crate::numerics::{log_det_psd, select, select_square, symmetrize};

/// Smallest sample count accepted by the oracle.
pub const MIN_SAMPLES: usize = 10_000;

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(symmetrize(m));
    let d = e.eigenvalues.map(|v| v.max(0.0).sqrt());
    &e.eigenvectors * DMatrix::from_diagonal(&d)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Sample covariance of the columns.
fn covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.ncols() as f64;
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        let mean = row.sum() / n;
        row.add_scalar_mut(-mean);
    }
    symmetrize(&(&centered * centered.transpose() / (n - 1.0)))
}

/// `2 H(y(t+1) | y(t))` up to the Gaussian constant.
fn conditional_logdet(y1: &DMatrix<f64>, y0: &DMatrix<f64>) -> Result<f64> {
    let k = y1.nrows();
    let mut joint = DMatrix::zeros(2 * k, y1.ncols());
    joint.rows_mut(0, k).copy_from(y1);
    joint.rows_mut(k, k).copy_from(y0);
    let c = covariance(&joint);
    let future: Vec<usize> = (0..k).collect();
    let past: Vec<usize> = (k..2 * k).collect();
    let cond = crate::numerics::schur_complement(&c, &future, &past)?;
    log_det_psd(&cond)
}

/// Monte-Carlo estimate of the one-step transfer: samples `z(t) ~ N(0, Σ)`
/// and target noise, forms the target update with and without the source
/// columns (common random numbers), and compares the empirical Gaussian
/// conditional entropies of `y(t+1)` given `y(t)`. Nats.
pub fn monte_carlo_transfer_oracle(
    sys: &DiscreteLti,
    part: &SubspacePartition,
    sigma_t: &DMatrix<f64>,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = sys.dim();
    if part.dim() != n || sigma_t.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "system has {n} states, partition {}, covariance {}x{}",
            part.dim(),
            sigma_t.nrows(),
            sigma_t.ncols()
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let y = part.target();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = psd_sqrt(sigma_t) * gaussian(n, samples, &mut rng);
    let xi = psd_sqrt(&select_square(sys.q(), y)) * gaussian(y.len(), samples, &mut rng);

    let all: Vec<usize> = (0..n).collect();
    let a_y = select(sys.a(), y, &all);
    let mut a_frozen = a_y.clone();
    for &j in part.source() {
        a_frozen.column_mut(j).fill(0.0);
    }
    let y0 = select(&z, y, &(0..samples).collect::<Vec<_>>());
    let full = &a_y * &z + &xi;
    let frozen = &a_frozen * &z + &xi;
    Ok(0.5 * (conditional_logdet(&full, &y0)? - conditional_logdet(&frozen, &y0)?))
}
