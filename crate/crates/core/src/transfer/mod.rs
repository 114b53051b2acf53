//! Information transfer between subspaces of `z(t+1) = A z(t) + ξ(t)`,
//! `ξ ~ N(0, Q)`.
//!
//! With `z` reordered as `(x1, x2, y)` for a transfer `x1 → y`:
//!
//! ```text
//! T = ½ log det(A_yx Σ_{x|y} A_yxᵀ + Q_y) − ½ log det(A_yx2 Σ_{x2|y} A_yx2ᵀ + Q_y)
//! ```
//!
//! where `x = (x1, x2)` and `Σ_{·|y}` are Schur complements of `Σ_y` in the
//! state covariance at time `t`. The first term is the conditional entropy of
//! `y(t+1)` given `y(t)` under the full update; the second is the same with
//! `x1` removed from the update of `y`. Values are in nats.

mod modal;
mod oracle;
mod partition;

pub use modal::{transfer_to_mode, transfer_to_target, ModalTarget};
pub use oracle::monte_carlo_transfer_oracle;
pub use partition::{GroupSpec, SubspacePartition};

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lti::{propagate_covariance, steady_state_covariance, DiscreteLti};
use crate::numerics::{cholesky, log_det_psd, schur_complement, select, select_square, symmetrize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeIndex {
    Step(usize),
    SteadyState,
}

impl fmt::Display for TimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeIndex::Step(t) => write!(f, "{t}"),
            TimeIndex::SteadyState => f.write_str("steady-state"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    /// `½ (numerator_logdet − denominator_logdet)`, in nats.
    pub value: f64,
    pub numerator_logdet: f64,
    pub denominator_logdet: f64,
    pub time: TimeIndex,
}

impl TransferResult {
    pub fn in_units(&self, units: Units) -> f64 {
        units.convert(self.value)
    }

    pub fn bits(&self) -> f64 {
        self.value / LN_2
    }
}

/// Core formula on raw matrices; `sigma` is the covariance at time `t`.
pub(crate) fn transfer_with(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    part: &SubspacePartition,
    sigma: &DMatrix<f64>,
    time: TimeIndex,
) -> Result<TransferResult> {
    let n = part.dim();
    if a.shape() != (n, n) || q.shape() != (n, n) || sigma.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "partition is over {n} states; A is {}x{}, Q is {}x{}, Σ is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let y = part.target();
    let x = part.non_target();
    let x2 = part.remainder();

    let sigma_y = select_square(sigma, y);
    cholesky(&symmetrize(&sigma_y)).map_err(|_| Error::SingularTargetCovariance)?;
    let q_y = select_square(q, y);

    let s_x = schur_complement(sigma, &x, y).map_err(|_| Error::SingularTargetCovariance)?;
    let a_yx = select(a, y, &x);
    let numerator = symmetrize(&(&a_yx * s_x * a_yx.transpose() + &q_y));

    let denominator = if x2.is_empty() {
        q_y
    } else {
        let s_x2 = schur_complement(sigma, x2, y).map_err(|_| Error::SingularTargetCovariance)?;
        let a_yx2 = select(a, y, x2);
        symmetrize(&(&a_yx2 * s_x2 * a_yx2.transpose() + &q_y))
    };

    let numerator_logdet =
        log_det_psd(&numerator).map_err(|_| Error::NonPdLogArgument { which: "numerator" })?;
    let denominator_logdet = log_det_psd(&denominator).map_err(|_| Error::NonPdLogArgument {
        which: "denominator",
    })?;
    Ok(TransferResult {
        value: 0.5 * (numerator_logdet - denominator_logdet),
        numerator_logdet,
        denominator_logdet,
        time,
    })
}

/// Transfer over one step starting from state covariance `sigma_t`.
pub fn one_step_transfer(
    sys: &DiscreteLti,
    part: &SubspacePartition,
    sigma_t: &DMatrix<f64>,
) -> Result<TransferResult> {
    transfer_with(sys.a(), sys.q(), part, sigma_t, TimeIndex::Step(0))
}

/// Transfer at every step of the covariance trajectory from `sigma0`;
/// `steps + 1` entries, the first at `t = 0`.
pub fn transfer_series(
    sys: &DiscreteLti,
    part: &SubspacePartition,
    sigma0: &DMatrix<f64>,
    steps: usize,
) -> Result<Vec<TransferResult>> {
    let traj = propagate_covariance(sys, sigma0, steps)?;
    traj.entries
        .iter()
        .enumerate()
        .map(|(t, s)| transfer_with(sys.a(), sys.q(), part, s, TimeIndex::Step(t)))
        .collect()
}

/// Transfer at the stationary covariance.
pub fn steady_state_transfer(
    sys: &DiscreteLti,
    part: &SubspacePartition,
) -> Result<TransferResult> {
    let sigma = steady_state_covariance(sys)?;
    transfer_with(sys.a(), sys.q(), part, &sigma, TimeIndex::SteadyState)
}

/// Pairwise transfers between groups. The diagonal is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub names: Vec<String>,
    pub entries: Vec<Vec<Option<TransferResult>>>,
}

impl TransferMatrix {
    /// Transfer from group `from` to group `to`.
    pub fn get(&self, from: usize, to: usize) -> Option<&TransferResult> {
        self.entries[from][to].as_ref()
    }

    pub fn value(&self, from: usize, to: usize) -> Option<f64> {
        self.get(from, to).map(|r| r.value)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn matrix_with(
    sys: &DiscreteLti,
    groups: &GroupSpec,
    sigma: &DMatrix<f64>,
    time: TimeIndex,
) -> Result<TransferMatrix> {
    let g = groups.len();
    let pairs: Vec<(usize, usize)> = (0..g)
        .flat_map(|i| (0..g).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let computed: Vec<Result<TransferResult>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let part = SubspacePartition::new(sys.dim(), groups.indices(i), groups.indices(j))?;
            transfer_with(sys.a(), sys.q(), &part, sigma, time)
        })
        .collect();
    let mut entries = vec![vec![None; g]; g];
    for (&(i, j), r) in pairs.iter().zip(computed) {
        entries[i][j] = Some(r?);
    }
    Ok(TransferMatrix {
        names: groups.names().map(str::to_owned).collect(),
        entries,
    })
}

/// Steady-state transfer between every ordered pair of groups.
pub fn transfer_matrix(sys: &DiscreteLti, groups: &GroupSpec) -> Result<TransferMatrix> {
    let sigma = steady_state_covariance(sys)?;
    matrix_with(sys, groups, &sigma, TimeIndex::SteadyState)
}

/// Transfer between every ordered pair of groups at covariance `sigma_t`.
pub fn transfer_matrix_at(
    sys: &DiscreteLti,
    groups: &GroupSpec,
    sigma_t: &DMatrix<f64>,
) -> Result<TransferMatrix> {
    matrix_with(sys, groups, sigma_t, TimeIndex::Step(0))
}
