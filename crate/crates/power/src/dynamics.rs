//! Multi-machine differential-algebraic model and its linearization.
//!
//! Per machine the differential states are `δ, ω, E'_q, E_fd` plus three
//! stabilizer states when a PSS is enabled. The algebraic states are the
//! stator currents `I_d, I_q` of every machine followed by `V` and `θ` of
//! every bus. Rotor angles are measured against the machine at the slack bus,
//! whose own angle is held at its initial value and dropped from the state;
//! every other angle then obeys `δ̇_i = ω_i - ω_ref`. Without this the uniform
//! rotation of all angles is a zero eigenvalue and no linearization is
//! Hurwitz.

use std::f64::consts::FRAC_PI_2;

use itflow::numerics::numerical_jacobian_scaled;
use itflow::GroupSpec;
use nalgebra::{DMatrix, DVector, Matrix3, RowVector3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{build_ybus, BusType, PowerNetworkModel, Pss};
use crate::powerflow::PowerFlowSolution;

/// Largest DAE residual accepted at an operating point.
pub const DAE_TOLERANCE: f64 = 1e-8;

/// Condition number of the algebraic Jacobian above which Kron reduction
/// refuses to proceed.
pub const MAX_ALGEBRAIC_CONDITION: f64 = 1e12;

const FD_STEP: f64 = 1e-6;

/// Stabilizer realization from speed deviation to exciter reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PssRealization {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub c: RowVector3<f64>,
    pub d: f64,
}

impl PssRealization {
    pub fn response(&self, s: Complex64) -> Complex64 {
        let a = self.a.map(|v| Complex64::new(v, 0.0));
        let m = Matrix3::from_diagonal_element(s) - a;
        let x = m.try_inverse().expect("s is not an eigenvalue")
            * self.b.map(|v| Complex64::new(v, 0.0));
        self.c.map(|v| Complex64::new(v, 0.0)).dot(&x.transpose()) + self.d
    }
}

/// Controllable canonical form of `k (1 + sT_num)² / (1 + sT_den)² · sT_w / (1 + sT_w)`.
pub fn pss_state_space(k_pss: f64, t_w: f64, t_num: f64, t_den: f64) -> PssRealization {
    // Numerator and denominator coefficients, highest power first.
    let lead = t_den * t_den * t_w;
    let num = [
        k_pss * t_w * t_num * t_num,
        2.0 * k_pss * t_w * t_num,
        k_pss * t_w,
        0.0,
    ]
    .map(|v| v / lead);
    let den = [
        1.0,
        (t_den * t_den + 2.0 * t_w * t_den) / lead,
        (t_w + 2.0 * t_den) / lead,
        1.0 / lead,
    ];
    let d = num[0];
    #[rustfmt::skip]
    let a = Matrix3::new(
        0.0, 1.0, 0.0,
        0.0, 0.0, 1.0,
        -den[3], -den[2], -den[1],
    );
    let c = RowVector3::new(
        num[3] - d * den[3],
        num[2] - d * den[2],
        num[1] - d * den[1],
    );
    PssRealization {
        a,
        b: Vector3::new(0.0, 0.0, 1.0),
        c,
        d,
    }
}

fn realization(p: &Pss) -> PssRealization {
    pss_state_space(p.k_pss, p.t_w, p.t_num, p.t_den)
}

/// Index bookkeeping shared by residual evaluation and labelling.
#[derive(Debug, Clone)]
struct Layout {
    /// Bus position of each machine.
    gen_bus: Vec<usize>,
    /// Machine whose angle is the reference.
    reference: usize,
    /// Offset of each machine's first state; the reference machine starts
    /// at `ω`.
    offset: Vec<usize>,
    pss: Vec<Option<PssRealization>>,
    nx: usize,
    n_gen: usize,
    n_bus: usize,
}

impl Layout {
    fn new(model: &PowerNetworkModel) -> Result<Self> {
        let index = model.bus_index();
        let slack = model
            .slack()
            .ok_or_else(|| Error::Validation("no slack bus".into()))?;
        let gen_bus: Vec<usize> = model.generators.iter().map(|g| index[&g.bus]).collect();
        for (k, b) in model.buses.iter().enumerate() {
            if b.kind != BusType::Pq && !gen_bus.contains(&k) {
                return Err(Error::Validation(format!(
                    "dynamic model needs a machine at {:?} bus {}",
                    b.kind, b.id
                )));
            }
        }
        let reference = gen_bus
            .iter()
            .position(|&k| k == slack)
            .expect("slack has a machine");
        let pss: Vec<Option<PssRealization>> = model
            .stabilizers()
            .into_iter()
            .map(|p| p.map(realization))
            .collect();
        let mut offset = Vec::with_capacity(gen_bus.len());
        let mut nx = 0;
        for (i, p) in pss.iter().enumerate() {
            offset.push(nx);
            nx += if i == reference { 3 } else { 4 } + if p.is_some() { 3 } else { 0 };
        }
        Ok(Self {
            gen_bus,
            reference,
            offset,
            pss,
            nx,
            n_gen: model.generators.len(),
            n_bus: model.buses.len(),
        })
    }

    fn ny(&self) -> usize {
        2 * self.n_gen + 2 * self.n_bus
    }

    /// Offsets of `(δ, ω, E'_q, E_fd, first PSS state)`; `δ` is `None` for
    /// the reference machine.
    fn slots(&self, i: usize) -> (Option<usize>, usize, usize, usize, usize) {
        let o = self.offset[i];
        if i == self.reference {
            (None, o, o + 1, o + 2, o + 3)
        } else {
            (Some(o), o + 1, o + 2, o + 3, o + 4)
        }
    }
}

/// Equilibrium of the DAE at one loading.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub loading: f64,
    pub v: DVector<f64>,
    pub theta: DVector<f64>,
    pub i_d: DVector<f64>,
    pub i_q: DVector<f64>,
    /// Differential states in [`state_labels`] order.
    pub x: DVector<f64>,
    /// Rotor angle of every machine, the reference included.
    pub delta: DVector<f64>,
    /// Inputs that hold the point in equilibrium.
    pub v_ref: DVector<f64>,
    pub t_m: DVector<f64>,
}

impl OperatingPoint {
    /// Algebraic vector `(I_d, I_q, V, θ)`.
    pub fn y(&self) -> DVector<f64> {
        let mut y = DVector::zeros(2 * self.i_d.len() + 2 * self.v.len());
        let (ng, nb) = (self.i_d.len(), self.v.len());
        y.rows_mut(0, ng).copy_from(&self.i_d);
        y.rows_mut(ng, ng).copy_from(&self.i_q);
        y.rows_mut(2 * ng, nb).copy_from(&self.v);
        y.rows_mut(2 * ng + nb, nb).copy_from(&self.theta);
        y
    }
}

/// Names of the differential states, `<generator>/<state>`.
pub fn state_labels(model: &PowerNetworkModel) -> Result<Vec<String>> {
    let layout = Layout::new(model)?;
    let mut labels = Vec::with_capacity(layout.nx);
    for (i, g) in model.generators.iter().enumerate() {
        if i != layout.reference {
            labels.push(format!("{}/delta", g.name));
        }
        for s in ["omega", "eq", "efd"] {
            labels.push(format!("{}/{s}", g.name));
        }
        if layout.pss[i].is_some() {
            for s in ["pss1", "pss2", "pss3"] {
                labels.push(format!("{}/{s}", g.name));
            }
        }
    }
    Ok(labels)
}

/// One group per machine holding all of its differential states.
pub fn generator_groups(model: &PowerNetworkModel) -> Result<GroupSpec> {
    let layout = Layout::new(model)?;
    let groups = model
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let end = layout.offset.get(i + 1).copied().unwrap_or(layout.nx);
            (g.name.clone(), (layout.offset[i]..end).collect())
        })
        .collect();
    Ok(GroupSpec::new(layout.nx, groups)?)
}

/// Residual evaluator with the admittance matrix built once.
struct Dae<'a> {
    model: &'a PowerNetworkModel,
    layout: Layout,
    ybus: DMatrix<Complex64>,
    omega_s: f64,
}

impl<'a> Dae<'a> {
    fn new(model: &'a PowerNetworkModel) -> Result<Self> {
        Ok(Self {
            layout: Layout::new(model)?,
            ybus: build_ybus(model)?,
            omega_s: model.omega_s(),
            model,
        })
    }

    fn angle(&self, i: usize, x: &DVector<f64>, op: &OperatingPoint) -> f64 {
        match self.layout.slots(i).0 {
            Some(k) => x[k],
            None => op.delta[i],
        }
    }

    fn f(&self, x: &DVector<f64>, y: &DVector<f64>, op: &OperatingPoint) -> DVector<f64> {
        let l = &self.layout;
        let ng = l.n_gen;
        let mut out = DVector::zeros(l.nx);
        let w_ref = x[l.slots(l.reference).1];
        for (i, g) in self.model.generators.iter().enumerate() {
            let (sd, sw, se, sf, sp) = l.slots(i);
            let (w, eq, efd) = (x[sw], x[se], x[sf]);
            let (id, iq, v) = (y[i], y[ng + i], y[2 * ng + l.gen_bus[i]]);
            let dw = w - self.omega_s;
            if let Some(sd) = sd {
                out[sd] = w - w_ref;
            }
            out[sw] = (op.t_m[i] - eq * iq - (g.x_q - g.x_d_prime) * id * iq - g.d * dw) / g.m;
            out[se] = (-eq - (g.x_d - g.x_d_prime) * id + efd) / g.t_do_prime;
            let mut v_pss = 0.0;
            if let Some(p) = &l.pss[i] {
                let z = Vector3::new(x[sp], x[sp + 1], x[sp + 2]);
                let dz = p.a * z + p.b * dw;
                out.rows_mut(sp, 3).copy_from(&dz);
                v_pss = (p.c * z)[0] + p.d * dw;
            }
            out[sf] = (-efd + g.k_a * (op.v_ref[i] + v_pss - v)) / g.t_a;
        }
        out
    }

    fn g(&self, x: &DVector<f64>, y: &DVector<f64>, op: &OperatingPoint) -> DVector<f64> {
        let l = &self.layout;
        let (ng, nb) = (l.n_gen, l.n_bus);
        let mut out = DVector::zeros(l.ny());
        let v = y.rows(2 * ng, nb);
        let theta = y.rows(2 * ng + nb, nb);
        let mut p_bal =
            DVector::from_iterator(nb, self.model.buses.iter().map(|b| -op.loading * b.p_load));
        let mut q_bal =
            DVector::from_iterator(nb, self.model.buses.iter().map(|b| -op.loading * b.q_load));
        for (i, g) in self.model.generators.iter().enumerate() {
            let k = l.gen_bus[i];
            let se = l.slots(i).2;
            let (id, iq) = (y[i], y[ng + i]);
            let phi = self.angle(i, x, op) - theta[k];
            let (s, c) = phi.sin_cos();
            out[i] = v[k] * s + g.r_s * id - g.x_q * iq;
            out[ng + i] = x[se] - v[k] * c - g.r_s * iq - g.x_d_prime * id;
            p_bal[k] += id * v[k] * s + iq * v[k] * c;
            q_bal[k] += id * v[k] * c - iq * v[k] * s;
        }
        let u = DVector::from_iterator(nb, (0..nb).map(|k| Complex64::from_polar(v[k], theta[k])));
        let cur = &self.ybus * &u;
        for k in 0..nb {
            let s = u[k] * cur[k].conj();
            out[2 * ng + k] = p_bal[k] - s.re;
            out[2 * ng + nb + k] = q_bal[k] - s.im;
        }
        out
    }

    fn residual(&self, op: &OperatingPoint) -> f64 {
        let y = op.y();
        self.f(&op.x, &y, op)
            .amax()
            .max(self.g(&op.x, &y, op).amax())
    }
}

/// Largest differential or algebraic residual at `op`.
pub fn dae_residual(model: &PowerNetworkModel, op: &OperatingPoint) -> Result<f64> {
    Ok(Dae::new(model)?.residual(op))
}

/// Machine states consistent with a converged power flow.
pub fn initialize_dynamic_states(
    model: &PowerNetworkModel,
    pf: &PowerFlowSolution,
) -> Result<OperatingPoint> {
    let dae = Dae::new(model)?;
    let l = &dae.layout;
    let ng = l.n_gen;
    let mut op = OperatingPoint {
        loading: pf.loading,
        v: pf.v.clone(),
        theta: pf.theta.clone(),
        i_d: DVector::zeros(ng),
        i_q: DVector::zeros(ng),
        x: DVector::zeros(l.nx),
        delta: DVector::zeros(ng),
        v_ref: DVector::zeros(ng),
        t_m: DVector::zeros(ng),
    };
    for (i, g) in model.generators.iter().enumerate() {
        let k = l.gen_bus[i];
        let bus = &model.buses[k];
        let s_gen = Complex64::new(
            pf.p[k] + pf.loading * bus.p_load,
            pf.q[k] + pf.loading * bus.q_load,
        );
        let u = pf.phasor(k);
        let cur = (s_gen / u).conj();
        let e = u + Complex64::new(g.r_s, g.x_q) * cur;
        let delta = if cur.norm() == 0.0 {
            pf.theta[k]
        } else {
            e.arg()
        };
        let rot = Complex64::from_polar(1.0, FRAC_PI_2 - delta);
        let (idq, vdq) = (cur * rot, u * rot);
        let (id, iq) = (idq.re, idq.im);
        let eq = vdq.im + g.r_s * iq + g.x_d_prime * id;
        let efd = eq + (g.x_d - g.x_d_prime) * id;
        let (sd, sw, se, sf, _) = l.slots(i);
        if let Some(sd) = sd {
            op.x[sd] = delta;
        }
        op.x[sw] = dae.omega_s;
        op.x[se] = eq;
        op.x[sf] = efd;
        op.delta[i] = delta;
        op.i_d[i] = id;
        op.i_q[i] = iq;
        op.v_ref[i] = pf.v[k] + efd / g.k_a;
        op.t_m[i] = eq * iq + (g.x_q - g.x_d_prime) * id * iq;
    }
    let residual = dae.residual(&op);
    if !(residual < DAE_TOLERANCE) {
        return Err(Error::InconsistentPowerFlow { residual });
    }
    Ok(op)
}

/// Jacobian blocks of `ẋ = f(x, y)`, `0 = g(x, y)` at an operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeBlocks {
    /// `∂f/∂x`
    pub a: DMatrix<f64>,
    /// `∂f/∂y`
    pub b: DMatrix<f64>,
    /// `∂g/∂x`
    pub c: DMatrix<f64>,
    /// `∂g/∂y`
    pub d: DMatrix<f64>,
}

pub fn linearize_dae(model: &PowerNetworkModel, op: &OperatingPoint) -> Result<DaeBlocks> {
    let dae = Dae::new(model)?;
    let (nx, ny) = (dae.layout.nx, dae.layout.ny());
    let mut z = DVector::zeros(nx + ny);
    z.rows_mut(0, nx).copy_from(&op.x);
    z.rows_mut(nx, ny).copy_from(&op.y());
    let full = |z: &DVector<f64>| {
        let x = z.rows(0, nx).into_owned();
        let y = z.rows(nx, ny).into_owned();
        let mut out = DVector::zeros(nx + ny);
        out.rows_mut(0, nx).copy_from(&dae.f(&x, &y, op));
        out.rows_mut(nx, ny).copy_from(&dae.g(&x, &y, op));
        out
    };
    let j = numerical_jacobian_scaled(full, &z, FD_STEP)?;
    Ok(DaeBlocks {
        a: j.view((0, 0), (nx, nx)).into_owned(),
        b: j.view((0, nx), (nx, ny)).into_owned(),
        c: j.view((nx, 0), (ny, nx)).into_owned(),
        d: j.view((nx, nx), (ny, ny)).into_owned(),
    })
}

/// Eliminates the algebraic variables: `A_cont = A - B D⁻¹ C`.
pub fn kron_reduce(blocks: &DaeBlocks) -> Result<DMatrix<f64>> {
    let DaeBlocks { a, b, c, d } = blocks;
    let ny = d.nrows();
    if d.ncols() != ny || b.shape() != (a.nrows(), ny) || c.shape() != (ny, a.ncols()) {
        return Err(itflow::Error::DimensionMismatch(format!(
            "blocks A {:?}, B {:?}, C {:?}, D {:?} do not conform",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        ))
        .into());
    }
    if ny == 0 {
        return Ok(a.clone());
    }
    let sv = d.clone().singular_values();
    let (sigma_min, sigma_max) = (sv.min(), sv.max());
    let condition = sigma_max / sigma_min;
    if !(condition <= MAX_ALGEBRAIC_CONDITION) {
        return Err(Error::SingularAlgebraicJacobian {
            sigma_min,
            condition,
        });
    }
    let solved = d
        .clone()
        .lu()
        .solve(c)
        .ok_or(Error::SingularAlgebraicJacobian {
            sigma_min,
            condition,
        })?;
    Ok(a - b * solved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netfile::ieee39;
    use crate::powerflow::solve_power_flow;
    use itflow::numerics::eigenvalues;

    fn base() -> (PowerNetworkModel, OperatingPoint) {
        let m = ieee39();
        let pf = solve_power_flow(&m, 1.0).unwrap();
        let op = initialize_dynamic_states(&m, &pf).unwrap();
        (m, op)
    }

    #[test]
    fn pss_gains() {
        let p = pss_state_space(2.0, 10.0, 0.5, 0.1);
        let dc = p.d + (p.c * (-p.a).try_inverse().unwrap() * p.b)[0];
        assert!(dc.abs() < 1e-12);
        assert!((p.d - 2.0 * 25.0).abs() < 1e-12);
        let s = Complex64::new(0.0, 1.0);
        let direct =
            2.0 * ((1.0 + s * 0.5) / (1.0 + s * 0.1)).powi(2) * s * 10.0 / (1.0 + s * 10.0);
        assert!((p.response(s) - direct).norm() < 1e-10);
    }

    #[test]
    fn initialized_point_is_an_equilibrium() {
        let (m, op) = base();
        assert!(dae_residual(&m, &op).unwrap() < DAE_TOLERANCE);
        assert_eq!(op.x.len(), 69);
        assert_eq!(state_labels(&m).unwrap().len(), 69);
    }

    #[test]
    fn idle_machine_sits_at_bus_angle() {
        let mut m = ieee39();
        for g in &mut m.generators {
            if g.name == "G10" {
                g.t_m = 0.0;
            }
        }
        let pf = solve_power_flow(&m, 1.0).unwrap();
        let k = m.bus_index()[&30];
        let i = m.generators.iter().position(|g| g.name == "G10").unwrap();
        // A PV machine still supplies reactive power; with P = 0 that current
        // is in quadrature with the terminal voltage, so the rotor lines up.
        let op = initialize_dynamic_states(&m, &pf).unwrap();
        assert!((op.delta[i] - pf.theta[k]).abs() < 1e-9);
        assert!(op.i_q[i].abs() < 1e-9);
    }

    #[test]
    fn structural_rows() {
        let (m, op) = base();
        let blocks = linearize_dae(&m, &op).unwrap();
        let labels = state_labels(&m).unwrap();
        let at = |s: &str| labels.iter().position(|l| l == s).unwrap();
        let (d, w) = (at("G10/delta"), at("G10/omega"));
        let w_ref = at("G2/omega");
        for c in 0..labels.len() {
            let expected = if c == w {
                1.0
            } else if c == w_ref {
                -1.0
            } else {
                0.0
            };
            assert!((blocks.a[(d, c)] - expected).abs() < 1e-8, "col {c}");
        }
        assert!(blocks.b.row(d).amax() < 1e-12);
        let efd = at("G10/efd");
        let t_a = m.generators.iter().find(|g| g.name == "G10").unwrap().t_a;
        assert!((blocks.a[(efd, efd)] + 1.0 / t_a).abs() < 1e-6);
    }

    #[test]
    fn base_load_is_hurwitz() {
        let (m, op) = base();
        let a = kron_reduce(&linearize_dae(&m, &op).unwrap()).unwrap();
        let worst = eigenvalues(&a)
            .unwrap()
            .iter()
            .map(|l| l.re)
            .fold(f64::MIN, f64::max);
        assert!(worst < 0.0, "max real part {worst}");
    }

    #[test]
    fn zero_coupling_reduction_is_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let blocks = DaeBlocks {
            a: a.clone(),
            b: DMatrix::zeros(2, 3),
            c: DMatrix::from_element(3, 2, 1.0),
            d: DMatrix::identity(3, 3),
        };
        assert_eq!(kron_reduce(&blocks).unwrap(), a);
    }

    #[test]
    fn single_machine_infinite_bus_elimination() {
        // Classical machine behind x on an infinite bus, with the electrical
        // power P = E sin(δ - θ)/x kept as an algebraic variable:
        // δ̇ = ω, ω̇ = -P/M - Dω/M, 0 = P - E sin δ / x.
        let (e, x, m, d, delta0) = (1.1, 0.4, 0.2, 0.05, 0.3f64);
        let k = e * delta0.cos() / x;
        let blocks = DaeBlocks {
            a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -d / m]),
            b: DMatrix::from_row_slice(2, 1, &[0.0, -1.0 / m]),
            c: DMatrix::from_row_slice(1, 2, &[-k, 0.0]),
            d: DMatrix::from_row_slice(1, 1, &[1.0]),
        };
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -k / m, -d / m]);
        assert!((kron_reduce(&blocks).unwrap() - expected).amax() < 1e-14);
    }

    #[test]
    fn singular_algebra_is_reported() {
        let blocks = DaeBlocks {
            a: DMatrix::identity(1, 1),
            b: DMatrix::from_element(1, 2, 1.0),
            c: DMatrix::from_element(2, 1, 1.0),
            d: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]),
        };
        assert!(matches!(
            kron_reduce(&blocks),
            Err(Error::SingularAlgebraicJacobian { .. })
        ));
    }
}
