//! Small benchmark systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lti::{ContinuousLti, DiscreteLti};
use crate::numerics::matrix_exponential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSpringParams {
    /// Large mass.
    pub big_mass: f64,
    /// Small mass.
    pub small_mass: f64,
    pub stiffness: f64,
    pub damping: f64,
}

impl Default for MassSpringParams {
    fn default() -> Self {
        Self {
            big_mass: 10.0,
            small_mass: 3.0,
            stiffness: 20.0,
            damping: 1.5,
        }
    }
}

/// Two masses tied to a wall and to each other by identical spring-damper
/// pairs. States `(z1, z2)` are position and velocity of the large mass,
/// `(z3, z4)` of the small one.
pub fn mass_spring_damper(p: MassSpringParams) -> Result<ContinuousLti> {
    let MassSpringParams {
        big_mass: bm,
        small_mass: sm,
        stiffness: k,
        damping: d,
    } = p;
    if [bm, sm].iter().any(|v| !(*v > 0.0)) || [k, d].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "non-physical mass-spring parameters {p:?}"
        )));
    }
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        -2.0 * k / bm, -2.0 * d / bm, k / bm, d / bm,
        0.0, 0.0, 0.0, 1.0,
        k / sm, d / sm, -2.0 * k / sm, -2.0 * d / sm,
    ]);
    let labels = ["z1", "z2", "z3", "z4"].map(String::from).to_vec();
    ContinuousLti::new(a, labels)
}

/// `x(t+1) = 0.7x + y + ξ_x`, `y(t+1) = μy + ξ_y`, unit noise.
pub fn two_state_example(mu: f64) -> DiscreteLti {
    let a = DMatrix::from_row_slice(2, 2, &[0.7, 1.0, 0.0, mu]);
    DiscreteLti::new(a, DMatrix::identity(2, 2), vec!["x".into(), "y".into()])
        .expect("fixed-size builder with identity noise")
}

/// Upper-triangular system whose participation matrix is the identity even
/// though `x2` drives `x1`.
pub fn participation_counterexample() -> ContinuousLti {
    participation_counterexample_with(3.4657)
}

/// Same system with the coupling entry replaced.
pub fn participation_counterexample_with(coupling: f64) -> ContinuousLti {
    let a = DMatrix::from_row_slice(2, 2, &[-0.2231, coupling, 0.0, -0.9163]);
    ContinuousLti::new(a, vec!["x1".into(), "x2".into()]).expect("fixed-size builder")
}

/// Noise-free trajectory sampled every `dt` on `[0, horizon]`; `x(t + dt) =
/// exp(A dt) x(t)` is exact for linear systems.
pub fn simulate_deterministic(
    sys: &ContinuousLti,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<Vec<DVector<f64>>> {
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and horizon >= 0, got {dt}, {horizon}"
        )));
    }
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries, system has {}",
            x0.len(),
            sys.dim()
        )));
    }
    let step = matrix_exponential(sys.a(), dt)?;
    let count = (horizon / dt + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(count + 1);
    out.push(x0.clone());
    for t in 0..count {
        let next = &step * &out[t];
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eig_biorthogonal, eigenvalues};

    fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
        let n = xs.clone().count() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn mass_spring_entries() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        assert_eq!(sys.a()[(1, 0)], -4.0);
        assert!((sys.a()[(3, 2)] + 40.0 / 3.0).abs() < 1e-15);
        assert!(eigenvalues(sys.a()).unwrap().iter().all(|l| l.re < 0.0));
    }

    #[test]
    fn undamped_unsprung_is_double_integrator() {
        let p = MassSpringParams {
            stiffness: 0.0,
            damping: 0.0,
            ..Default::default()
        };
        let sys = mass_spring_damper(p).unwrap();
        assert!(eigenvalues(sys.a())
            .unwrap()
            .iter()
            .all(|l| l.norm() == 0.0));
        assert!(mass_spring_damper(MassSpringParams { big_mass: 0.0, ..p }).is_err());
    }

    #[test]
    fn two_state_eigenvalues() {
        for mu in [0.0, 0.1, 0.5, 0.99] {
            let ev = eigenvalues(two_state_example(mu).a()).unwrap();
            let mut re: Vec<f64> = ev.iter().map(|l| l.re).collect();
            re.sort_by(f64::total_cmp);
            let mut expected = [0.7, mu];
            expected.sort_by(f64::total_cmp);
            assert_eq!(re, expected);
        }
    }

    #[test]
    fn counterexample_spectrum_and_mode_shape() {
        let sys = participation_counterexample();
        let eig = eig_biorthogonal(sys.a()).unwrap();
        assert!((eig.values[0].re + 0.2231).abs() < 1e-12);
        assert!((eig.values[1].re + 0.9163).abs() < 1e-12);
        // x1(t) carries x2(0) on the slow mode through the left eigenvector,
        // printed with unit normalization.
        let u = eig.left_vector(0);
        let norm = u.norm();
        assert!((u[0].norm() / norm - 0.1961).abs() < 1e-4);
        assert!((u[1].norm() / norm - 0.9806).abs() < 1e-4);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        let traj = simulate_deterministic(&sys, &DVector::zeros(4), 5.0, 0.1).unwrap();
        assert_eq!(traj.len(), 51);
        assert!(traj.iter().all(|x| x.amax() == 0.0));
    }

    #[test]
    fn stable_trajectory_decays() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let traj = simulate_deterministic(&sys, &x0, 200.0, 0.5).unwrap();
        assert!(traj.last().unwrap().norm() < 1e-6);
    }

    #[test]
    fn big_mass_moves_small_mass_more() {
        let sys = mass_spring_damper(MassSpringParams::default()).unwrap();
        let from_big = simulate_deterministic(
            &sys,
            &DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            40.0,
            0.01,
        )
        .unwrap();
        let from_small = simulate_deterministic(
            &sys,
            &DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]),
            40.0,
            0.01,
        )
        .unwrap();
        let small_pos = variance(from_big.iter().map(|x| x[2]));
        let big_pos = variance(from_small.iter().map(|x| x[0]));
        assert!(small_pos > 5.0 * big_pos, "{small_pos} vs {big_pos}");
    }
}
