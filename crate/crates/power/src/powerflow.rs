//! Newton-Raphson power flow in polar coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{build_ybus, BusType, PowerNetworkModel};

pub const PF_TOLERANCE: f64 = 1e-8;
pub const PF_MAX_ITERATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub loading: f64,
    /// Magnitudes and angles in bus order; the slack angle is zero.
    pub v: DVector<f64>,
    pub theta: DVector<f64>,
    /// Net injections (generation minus load) in bus order.
    pub p: DVector<f64>,
    pub q: DVector<f64>,
    pub iterations: usize,
    pub mismatch: f64,
}

impl PowerFlowSolution {
    pub fn phasor(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.v[k], self.theta[k])
    }
}

/// Scheduled net active injection per bus at loading `lambda`: loads scale,
/// and so does every machine's mechanical power except the slack machine's.
pub fn scheduled_injection(model: &PowerNetworkModel, lambda: f64) -> (DVector<f64>, DVector<f64>) {
    let index = model.bus_index();
    let n = model.buses.len();
    let mut p = DVector::from_iterator(n, model.buses.iter().map(|b| -lambda * b.p_load));
    let q = DVector::from_iterator(n, model.buses.iter().map(|b| -lambda * b.q_load));
    for g in &model.generators {
        let k = index[&g.bus];
        if model.buses[k].kind == BusType::Pv {
            p[k] += lambda * g.t_m;
        }
    }
    (p, q)
}

fn injections(
    y: &DMatrix<Complex64>,
    v: &DVector<f64>,
    theta: &DVector<f64>,
) -> DVector<Complex64> {
    let u = DVector::from_iterator(
        v.len(),
        v.iter()
            .zip(theta.iter())
            .map(|(m, a)| Complex64::from_polar(*m, *a)),
    );
    let i = y * &u;
    u.zip_map(&i, |a, b| a * b.conj())
}

pub fn solve_power_flow(model: &PowerNetworkModel, loading: f64) -> Result<PowerFlowSolution> {
    solve_power_flow_from(model, loading, None)
}

/// As [`solve_power_flow`], warm-started from `start` when given (flat start
/// otherwise). Setpoint magnitudes always override the start.
pub fn solve_power_flow_from(
    model: &PowerNetworkModel,
    loading: f64,
    start: Option<&PowerFlowSolution>,
) -> Result<PowerFlowSolution> {
    let y = build_ybus(model)?;
    let n = model.buses.len();
    let slack = model
        .slack()
        .ok_or_else(|| Error::Validation("no slack bus".into()))?;
    let (p_sched, q_sched) = scheduled_injection(model, loading);
    let mut v = match start {
        Some(s) if s.v.len() == n => s.v.clone(),
        _ => DVector::from_element(n, 1.0),
    };
    let mut theta = match start {
        Some(s) if s.theta.len() == n => s.theta.clone(),
        _ => DVector::zeros(n),
    };
    for (k, b) in model.buses.iter().enumerate() {
        if b.kind != BusType::Pq {
            v[k] = b.v_set;
        }
    }
    theta[slack] = 0.0;
    let angle_buses: Vec<usize> = (0..n).filter(|&k| k != slack).collect();
    let pq_buses: Vec<usize> = (0..n)
        .filter(|&k| model.buses[k].kind == BusType::Pq)
        .collect();
    let (na, nm) = (angle_buses.len(), pq_buses.len());

    let mismatch_of = |v: &DVector<f64>, theta: &DVector<f64>| -> DVector<f64> {
        let s = injections(&y, v, theta);
        let mut f = DVector::zeros(na + nm);
        for (r, &k) in angle_buses.iter().enumerate() {
            f[r] = s[k].re - p_sched[k];
        }
        for (r, &k) in pq_buses.iter().enumerate() {
            f[na + r] = s[k].im - q_sched[k];
        }
        f
    };

    let mut f = mismatch_of(&v, &theta);
    let mut iterations = 0;
    loop {
        let mismatch = f.amax();
        if !mismatch.is_finite() {
            return Err(Error::PowerFlowDivergence {
                iterations,
                mismatch,
            });
        }
        if mismatch < PF_TOLERANCE {
            let s = injections(&y, &v, &theta);
            return Ok(PowerFlowSolution {
                loading,
                v,
                theta,
                p: s.map(|c| c.re),
                q: s.map(|c| c.im),
                iterations,
                mismatch,
            });
        }
        if iterations == PF_MAX_ITERATIONS {
            return Err(Error::PowerFlowDivergence {
                iterations,
                mismatch,
            });
        }
        iterations += 1;

        // dS/dθ = j diag(U) conj(diag(I) - Y diag(U)),
        // dS/d|V| = diag(U) conj(Y diag(U/|U|)) + conj(diag(I)) diag(U/|U|).
        let u = DVector::from_iterator(
            n,
            v.iter()
                .zip(theta.iter())
                .map(|(m, a)| Complex64::from_polar(*m, *a)),
        );
        let cur = &y * &u;
        let dir = u.zip_map(&v, |c, m| c / m);
        let j = Complex64::new(0.0, 1.0);
        let mut jac = DMatrix::zeros(na + nm, na + nm);
        let ds_dtheta = |r: usize, c: usize| -> Complex64 {
            let diag = if r == c {
                cur[r].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            j * u[r] * (diag - (y[(r, c)] * u[c]).conj())
        };
        let ds_dv = |r: usize, c: usize| -> Complex64 {
            let diag = if r == c {
                cur[r].conj() * dir[r]
            } else {
                Complex64::new(0.0, 0.0)
            };
            u[r] * (y[(r, c)] * dir[c]).conj() + diag
        };
        for (a, &r) in angle_buses.iter().enumerate() {
            for (b, &c) in angle_buses.iter().enumerate() {
                jac[(a, b)] = ds_dtheta(r, c).re;
            }
            for (b, &c) in pq_buses.iter().enumerate() {
                jac[(a, na + b)] = ds_dv(r, c).re;
            }
        }
        for (a, &r) in pq_buses.iter().enumerate() {
            for (b, &c) in angle_buses.iter().enumerate() {
                jac[(na + a, b)] = ds_dtheta(r, c).im;
            }
            for (b, &c) in pq_buses.iter().enumerate() {
                jac[(na + a, na + b)] = ds_dv(r, c).im;
            }
        }
        let Some(dx) = jac.lu().solve(&f) else {
            return Err(Error::PowerFlowDivergence {
                iterations,
                mismatch,
            });
        };
        for (a, &k) in angle_buses.iter().enumerate() {
            theta[k] -= dx[a];
        }
        for (b, &k) in pq_buses.iter().enumerate() {
            v[k] -= dx[na + b];
        }
        f = mismatch_of(&v, &theta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netfile::ieee39;
    use crate::network::fixtures::two_bus;
    use crate::network::{Branch, Bus};

    #[test]
    fn unloaded_lossless_network_is_flat() {
        let mut m = two_bus();
        m.buses.push(Bus {
            id: 3,
            kind: BusType::Pv,
            v_set: 1.0,
            p_load: 0.0,
            q_load: 0.0,
        });
        m.branches.push(Branch {
            from: 2,
            to: 3,
            r: 0.0,
            x: 0.2,
            b: 0.0,
            tap: 1.0,
        });
        let pf = solve_power_flow(&m, 1.0).unwrap();
        assert!(pf.mismatch < 1e-12 && pf.iterations == 0);
        assert_eq!(pf.theta.amax(), 0.0);
        assert!(pf.v.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn two_bus_load_matches_closed_form() {
        // Lossless line x = 0.1 feeding P = 1 at unity power factor:
        // V² from V⁴ + (2xQ - 1)V² + x²(P² + Q²) = 0.
        let mut m = two_bus();
        m.buses[1].p_load = 1.0;
        let pf = solve_power_flow(&m, 1.0).unwrap();
        let x: f64 = 0.1;
        let v2 = (1.0 + (1.0 - 4.0 * x * x).sqrt()) / 2.0;
        assert!((pf.v[1] - v2.sqrt()).abs() < 1e-9);
        assert!((pf.p[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn beyond_the_nose_diverges() {
        let mut m = two_bus();
        m.buses[1].p_load = 1.0;
        // Maximum deliverable unity-power-factor power is 1/(2x) = 5.
        assert!(solve_power_flow(&m, 4.9).is_ok());
        assert!(matches!(
            solve_power_flow(&m, 5.2),
            Err(Error::PowerFlowDivergence { .. })
        ));
    }

    #[test]
    fn ieee39_base_case() {
        let m = ieee39();
        let pf = solve_power_flow(&m, 1.0).unwrap();
        assert!(pf.mismatch < PF_TOLERANCE);
        let slack = m.slack().unwrap();
        // Slack covers the remaining load plus losses, which are small and positive.
        let gen: f64 = m
            .generators
            .iter()
            .filter(|g| g.bus != 31)
            .map(|g| g.t_m)
            .sum();
        let load: f64 = m.buses.iter().map(|b| b.p_load).sum();
        let losses = pf.p.sum();
        assert!(losses > 0.0 && losses < 0.02 * load, "losses {losses}");
        assert!((pf.p[slack] + m.buses[slack].p_load - (load + losses - gen)).abs() < 1e-8);
        // Published solution: slack dispatch about 677.9 MW with 9.2 MW local load.
        assert!(
            (pf.p[slack] + m.buses[slack].p_load - 6.7787).abs() < 0.02,
            "{}",
            pf.p[slack]
        );
    }
}
