//! Three-bus generator/load system with a dynamic load, parameterized by the
//! reactive load `Q1` (per unit on a 100 MVA base).
//!
//! In the load-angle equation the `93.33333·V` term is subtracted. The
//! printed form leaves the operator ambiguous; with an added term the system
//! has no equilibrium on `Q1 ∈ [0, 15]`, while the subtracted form gives two
//! Hopf crossings followed by a saddle-node, as the bifurcation diagram shows.

use itflow::{discretize, ContinuousLti, DiscreteLti};
use nalgebra::DVector;

use crate::continuation::{
    near_fold_point, sweep_equilibria, BranchPoint, EquilibriumBranch, FoldPoint, SweepOptions,
};
use crate::equilibrium::{find_equilibrium, Equilibrium, NewtonOptions};
use crate::error::Result;

pub const THREE_BUS_LABELS: [&str; 4] = ["delta_g", "omega", "delta_l", "V"];

/// Default sweep range for `Q1`.
pub const Q1_RANGE: (f64, f64) = (0.0, 15.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBusState {
    pub delta_g: f64,
    pub omega: f64,
    pub delta_l: f64,
    pub v: f64,
}

impl ThreeBusState {
    /// Flat start.
    pub const FLAT: Self = Self {
        delta_g: 0.0,
        omega: 0.0,
        delta_l: 0.0,
        v: 1.0,
    };

    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_vec(vec![self.delta_g, self.omega, self.delta_l, self.v])
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        Self {
            delta_g: x[0],
            omega: x[1],
            delta_l: x[2],
            v: x[3],
        }
    }

    pub fn derivative(self, q1: f64) -> [f64; 4] {
        rhs_signed(self, q1, -1.0)
    }
}

fn rhs_signed(s: ThreeBusState, q1: f64, sign: f64) -> [f64; 4] {
    let ThreeBusState {
        delta_g: dg,
        omega: w,
        delta_l: dl,
        v,
    } = s;
    [
        w,
        16.66667 * (dl - dg + 0.08727).sin() * v - 0.16667 * w + 1.88074,
        496.87181 * v * v
            - 166.66667 * (dl - dg - 0.08727).cos() * v
            - 666.66667 * (dl - 0.20944).cos() * v
            + sign * 93.33333 * v
            + 33.33333 * q1
            + 43.33333,
        -78.76384 * v * v
            + 26.21722 * (dl - dg - 0.01241).cos() * v
            + 104.86887 * (dl - 0.13458).cos() * v
            + 14.52288 * v
            - 5.22876 * q1
            - 7.03268,
    ]
}

/// Vector field in `(δ_g, ω, δ_l, V)` order.
pub fn three_bus_rhs(x: &DVector<f64>, q1: f64) -> DVector<f64> {
    DVector::from_row_slice(&ThreeBusState::from_vector(x).derivative(q1))
}

pub fn three_bus_equilibrium(guess: ThreeBusState, q1: f64) -> Result<Equilibrium> {
    find_equilibrium(
        |x| three_bus_rhs(x, q1),
        &guess.to_vector(),
        &NewtonOptions::default(),
    )
}

pub fn three_bus_sweep(lo: f64, hi: f64, opts: &SweepOptions) -> Result<EquilibriumBranch> {
    sweep_equilibria(
        three_bus_rhs,
        &ThreeBusState::FLAT.to_vector(),
        lo,
        hi,
        opts,
    )
}

/// Stable equilibrium whose load voltage sits `dv` above the fold voltage.
pub fn three_bus_near_fold(fold: &FoldPoint, dv: f64, opts: &SweepOptions) -> Result<BranchPoint> {
    near_fold_point(three_bus_rhs, fold, dv, opts)
}

pub fn three_bus_continuous(point: &BranchPoint) -> Result<ContinuousLti> {
    let labels = THREE_BUS_LABELS.map(String::from).to_vec();
    Ok(ContinuousLti::new(point.jacobian.clone(), labels)?)
}

/// Discretized linearization with isotropic noise.
pub fn three_bus_lti(point: &BranchPoint, tau: f64, sigma: f64) -> Result<DiscreteLti> {
    Ok(discretize(&three_bus_continuous(point)?, tau, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_rate_is_speed() {
        let s = ThreeBusState {
            delta_g: 0.3,
            omega: 0.5,
            delta_l: -1.0,
            v: 0.7,
        };
        assert_eq!(s.derivative(2.0)[0], 0.5);
    }

    #[test]
    fn zero_voltage_load_angle_rate() {
        let s = ThreeBusState {
            delta_g: 0.4,
            omega: 0.0,
            delta_l: 1.1,
            v: 0.0,
        };
        let q1 = 3.0;
        assert!((s.derivative(q1)[2] - (33.33333 * q1 + 43.33333)).abs() < 1e-12);
    }

    #[test]
    fn flat_start_reaches_light_load_equilibrium() {
        let eq = three_bus_equilibrium(ThreeBusState::FLAT, 0.0).unwrap();
        let s = ThreeBusState::from_vector(&eq.state);
        assert!(s.derivative(0.0).iter().all(|v| v.abs() < 1e-10));
        assert!(s.omega.abs() < 1e-12 && s.v > 0.0);
    }

    #[test]
    fn added_voltage_term_has_no_equilibrium() {
        let f = |x: &DVector<f64>| {
            DVector::from_row_slice(&rhs_signed(ThreeBusState::from_vector(x), 0.0, 1.0))
        };
        for v0 in [0.5, 1.0, 1.5, 2.0] {
            let guess = ThreeBusState {
                v: v0,
                ..ThreeBusState::FLAT
            }
            .to_vector();
            assert!(find_equilibrium(f, &guess, &NewtonOptions::default()).is_err());
        }
    }
}
