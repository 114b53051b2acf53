use itflow::numerics::numerical_jacobian_scaled;
use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Residual ∞-norm accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Relative finite-difference step for the Newton Jacobian.
    pub jacobian_step: f64,
    /// Reciprocal condition below which the Jacobian counts as singular.
    pub min_rcond: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 10,
            jacobian_step: 1e-7,
            min_rcond: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub state: DVector<f64>,
    pub residual: f64,
    /// Residual evaluations performed, counting the final converged one.
    pub iterations: usize,
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(
        0.0,
        |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

/// Damped Newton iteration for `f(x) = 0` from `guess`.
pub fn find_equilibrium<F>(f: F, guess: &DVector<f64>, opts: &NewtonOptions) -> Result<Equilibrium>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = guess.clone();
    let mut fx = f(&x);
    let mut residual = max_abs(&fx);
    if !residual.is_finite() {
        return Err(Error::NoConvergence {
            residual,
            iterations: 0,
        });
    }
    for it in 1..=opts.max_iterations {
        if residual < opts.tolerance {
            return Ok(Equilibrium {
                state: x,
                residual,
                iterations: it,
            });
        }
        let j = numerical_jacobian_scaled(&f, &x, opts.jacobian_step)?;
        let sv = j.singular_values();
        let rcond = sv.min() / sv.max().max(f64::MIN_POSITIVE);
        if !(rcond > opts.min_rcond) {
            return Err(Error::SingularJacobian { rcond });
        }
        let dx = j.lu().solve(&fx).ok_or(Error::SingularJacobian { rcond })?;
        let mut t = 1.0;
        let mut candidate = &x - &dx;
        let mut f_candidate = f(&candidate);
        let mut r_candidate = max_abs(&f_candidate);
        for _ in 0..opts.max_halvings {
            if r_candidate < residual {
                break;
            }
            t *= 0.5;
            candidate = &x - &dx * t;
            f_candidate = f(&candidate);
            r_candidate = max_abs(&f_candidate);
        }
        if !r_candidate.is_finite() {
            return Err(Error::NoConvergence {
                residual,
                iterations: it,
            });
        }
        x = candidate;
        fx = f_candidate;
        residual = r_candidate;
    }
    if residual < opts.tolerance {
        return Ok(Equilibrium {
            state: x,
            residual,
            iterations: opts.max_iterations + 1,
        });
    }
    Err(Error::NoConvergence {
        residual,
        iterations: opts.max_iterations,
    })
}

/// Extra undamped Newton steps past convergence, kept only while they lower
/// the residual.
pub fn polish<F>(f: F, x: &DVector<f64>, steps: usize, rel_step: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut best = x.clone();
    let mut fx = f(&best);
    let mut r = max_abs(&fx);
    for _ in 0..steps {
        if r == 0.0 {
            break;
        }
        let j = numerical_jacobian_scaled(&f, &best, rel_step)?;
        let Some(dx) = j.lu().solve(&fx) else { break };
        let cand = &best - dx;
        let fc = f(&cand);
        let rc = max_abs(&fc);
        if !(rc < r) {
            break;
        }
        (best, fx, r) = (cand, fc, rc);
    }
    Ok(best)
}
