//! Continuous and discrete stochastic linear time-invariant systems.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{
    ensure_finite, ensure_square, matrix_exponential, min_symmetric_eigenvalue,
    solve_discrete_lyapunov, spectral_radius, symmetrize,
};

/// Default noise scale for discretization.
pub const DEFAULT_SIGMA: f64 = 1.0;

fn check_labels(labels: &[String], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} states",
            labels.len()
        )));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate state label {l:?}"
            )));
        }
    }
    Ok(())
}

/// Generates `x1, x2, ...`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// `ẋ = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousLti {
    a: DMatrix<f64>,
    labels: Vec<String>,
}

impl ContinuousLti {
    pub fn new(a: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        ensure_square(&a, "ContinuousLti")?;
        ensure_finite(&a, "ContinuousLti")?;
        check_labels(&labels, a.nrows())?;
        Ok(Self { a, labels })
    }

    pub fn with_default_labels(a: DMatrix<f64>) -> Result<Self> {
        let labels = default_labels(a.nrows());
        Self::new(a, labels)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// `z(t+1) = A z(t) + ξ(t)`, `ξ ~ N(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLti {
    a: DMatrix<f64>,
    q: DMatrix<f64>,
    labels: Vec<String>,
    /// Sampling interval in seconds; informational only.
    step: Option<f64>,
}

impl DiscreteLti {
    pub fn new(a: DMatrix<f64>, q: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        ensure_square(&a, "DiscreteLti")?;
        ensure_finite(&a, "DiscreteLti")?;
        ensure_finite(&q, "DiscreteLti noise")?;
        if q.shape() != a.shape() {
            return Err(Error::DimensionMismatch("A and Q differ in size".into()));
        }
        let scale = q.amax().max(f64::MIN_POSITIVE);
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("Q is not symmetric".into()));
        }
        if min_symmetric_eigenvalue(&q) < -1e-12 * scale {
            return Err(Error::InvalidArgument(
                "Q is not positive semidefinite".into(),
            ));
        }
        check_labels(&labels, a.nrows())?;
        Ok(Self {
            a,
            q: symmetrize(&q),
            labels,
            step: None,
        })
    }

    /// Isotropic noise `Q = σ²I` with default labels.
    pub fn isotropic(a: DMatrix<f64>, sigma: f64) -> Result<Self> {
        let n = a.nrows();
        let labels = default_labels(n);
        Self::new(a, DMatrix::identity(n, n) * (sigma * sigma), labels)
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_labels(&labels, self.dim())?;
        self.labels = labels;
        Ok(self)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// `A = exp(A_cont τ)`, `Q = σ²I`; noise is injected once per step, not
/// integrated through the dynamics.
pub fn discretize(sys: &ContinuousLti, tau: f64, sigma: f64) -> Result<DiscreteLti> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tau must be > 0, got {tau}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be > 0, got {sigma}"
        )));
    }
    let a = matrix_exponential(sys.a(), tau)?;
    let n = sys.dim();
    let q = DMatrix::identity(n, n) * (sigma * sigma);
    Ok(DiscreteLti::new(a, q, sys.labels().to_vec())?.with_step(tau))
}

/// `Σ(0), Σ(1), ...` under `Σ(t+1) = AΣ(t)Aᵀ + Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTrajectory {
    pub entries: Vec<DMatrix<f64>>,
}

impl CovarianceTrajectory {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn at(&self, t: usize) -> &DMatrix<f64> {
        &self.entries[t]
    }

    pub fn last(&self) -> &DMatrix<f64> {
        self.entries.last().expect("trajectory is never empty")
    }
}

pub fn propagate_covariance(
    sys: &DiscreteLti,
    sigma0: &DMatrix<f64>,
    steps: usize,
) -> Result<CovarianceTrajectory> {
    if sigma0.shape() != sys.a().shape() {
        return Err(Error::DimensionMismatch(format!(
            "initial covariance is {}x{}, system has {} states",
            sigma0.nrows(),
            sigma0.ncols(),
            sys.dim()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let a = sys.a();
    let at = a.transpose();
    let mut entries = Vec::with_capacity(steps + 1);
    entries.push(sigma0.clone());
    for t in 0..steps {
        let next = symmetrize(&(a * &entries[t] * &at + sys.q()));
        entries.push(next);
    }
    Ok(CovarianceTrajectory { entries })
}

pub fn steady_state_covariance(sys: &DiscreteLti) -> Result<DMatrix<f64>> {
    solve_discrete_lyapunov(sys.a(), sys.q())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub spectral_radius: f64,
    /// `1 − ρ(A)`; negative when unstable.
    pub margin: f64,
}

pub fn is_stable(sys: &DiscreteLti) -> Result<Stability> {
    let rho = spectral_radius(sys.a())?;
    Ok(Stability {
        stable: rho < 1.0,
        spectral_radius: rho,
        margin: 1.0 - rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{mass_spring_damper, two_state_example, MassSpringParams};

    #[test]
    fn tiny_step_is_near_identity() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        let d = discretize(&sys, 1e-9, 1.0).unwrap();
        assert!((d.a() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-7);
    }

    #[test]
    fn mass_spring_discretization_is_stable() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        let d = discretize(&sys, 0.1, 1.0).unwrap();
        assert!(is_stable(&d).unwrap().stable);
        assert_eq!(d.step(), Some(0.1));
    }

    #[test]
    fn zero_dynamics_covariance_is_q() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let sys = DiscreteLti::new(DMatrix::zeros(2, 2), q.clone(), default_labels(2)).unwrap();
        let traj = propagate_covariance(&sys, &DMatrix::identity(2, 2), 3).unwrap();
        assert_eq!(traj.len(), 4);
        for t in 1..=3 {
            assert_eq!(traj.at(t), &q);
        }
        assert_eq!(steady_state_covariance(&sys).unwrap(), q);
    }

    #[test]
    fn one_step_from_zero_is_q() {
        let sys = two_state_example(0.5);
        let traj = propagate_covariance(&sys, &DMatrix::zeros(2, 2), 1).unwrap();
        assert_eq!(traj.at(1), sys.q());
    }

    #[test]
    fn two_state_steady_state_values() {
        let s = steady_state_covariance(&two_state_example(0.5)).unwrap();
        // Hand solution of the stationary equations.
        let syy = 4.0 / 3.0;
        let sxy = 0.5 * syy / (1.0 - 0.35);
        let sxx = (1.4 * sxy + syy + 1.0) / (1.0 - 0.49);
        assert!((s[(1, 1)] - syy).abs() < 1e-12);
        assert!((s[(0, 1)] - sxy).abs() < 1e-12);
        assert!((s[(0, 0)] - sxx).abs() < 1e-12);
        assert!((sxy - 1.0256).abs() < 1e-4 && (sxx - 7.391).abs() < 1e-3);
    }

    #[test]
    fn stability_margin() {
        let s = is_stable(&two_state_example(0.5)).unwrap();
        assert!(s.stable);
        assert!((s.margin - 0.3).abs() < 1e-12);
        assert!(!is_stable(&two_state_example(1.0)).unwrap().stable);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiscreteLti::new(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            default_labels(2)
        )
        .is_err());
        assert!(ContinuousLti::new(DMatrix::zeros(2, 2), vec!["a".into(), "a".into()]).is_err());
        let sys = two_state_example(0.5);
        assert!(propagate_covariance(&sys, &DMatrix::zeros(3, 3), 2).is_err());
        assert!(propagate_covariance(&sys, &DMatrix::zeros(2, 2), 0).is_err());
    }
}
