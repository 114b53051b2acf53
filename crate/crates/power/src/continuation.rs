//! Natural-parameter continuation of equilibria of `ẋ = f(x, p)`.

use std::fmt;

use itflow::numerics::{eig_biorthogonal, eigenvalues, numerical_jacobian_scaled};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::equilibrium::{find_equilibrium, polish, NewtonOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Stable,
    /// A complex pair in the right half plane.
    OscillatoryUnstable,
    /// Only real eigenvalues in the right half plane.
    MonotoneUnstable,
}

impl StabilityClass {
    pub fn of(eigs: &[Complex64]) -> Self {
        if eigs.iter().any(|l| l.re > 0.0 && l.im != 0.0) {
            StabilityClass::OscillatoryUnstable
        } else if eigs.iter().any(|l| l.re > 0.0) {
            StabilityClass::MonotoneUnstable
        } else {
            StabilityClass::Stable
        }
    }

    pub fn is_stable(self) -> bool {
        self == StabilityClass::Stable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::OscillatoryUnstable => "oscillatory-unstable",
            StabilityClass::MonotoneUnstable => "monotone-unstable",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub param: f64,
    pub state: DVector<f64>,
    /// Continuous-time linearization at `state`.
    pub jacobian: DMatrix<f64>,
    /// Sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    pub class: StabilityClass,
}

impl BranchPoint {
    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest real part over complex eigenvalues, if any.
    pub fn max_complex_real(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|l| l.im != 0.0)
            .map(|l| l.re)
            .reduce(f64::max)
    }

    pub fn max_real_real(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|l| l.im == 0.0)
            .map(|l| l.re)
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BifurcationKind {
    Hopf,
    SaddleNode,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::Hopf => "hopf",
            BifurcationKind::SaddleNode => "saddle-node",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bifurcation {
    pub kind: BifurcationKind,
    pub point: BranchPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPoint {
    pub param: f64,
    pub state: DVector<f64>,
    /// State component held fixed while the fold was located.
    pub component: usize,
    /// Sign of the change in that component as the parameter grows along
    /// the traced branch.
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedEnd,
    /// Continuation could not advance past `param` with the smallest step.
    StepFloor {
        param: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumBranch {
    pub points: Vec<BranchPoint>,
    /// In parameter order.
    pub bifurcations: Vec<Bifurcation>,
    pub termination: Termination,
    pub fold: Option<FoldPoint>,
}

impl EquilibriumBranch {
    pub fn hopf_points(&self) -> impl Iterator<Item = &Bifurcation> {
        self.bifurcations
            .iter()
            .filter(|b| b.kind == BifurcationKind::Hopf)
    }

    pub fn saddle_nodes(&self) -> impl Iterator<Item = &Bifurcation> {
        self.bifurcations
            .iter()
            .filter(|b| b.kind == BifurcationKind::SaddleNode)
    }

    /// Swept points strictly before `param`.
    pub fn points_before(&self, param: f64) -> &[BranchPoint] {
        let end = self.points.partition_point(|p| p.param < param);
        &self.points[..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Nominal step; `None` uses 1/200 of the range.
    pub initial_step: Option<f64>,
    /// Smallest step as a fraction of the range.
    pub min_step_fraction: f64,
    /// Hopf crossings are refined until the pair's real part is below this.
    pub hopf_tolerance: f64,
    /// A corrector result further than this (∞-norm) from the warm start is
    /// rejected as a jump to another branch.
    pub max_state_jump: f64,
    /// Relative step for the linearization at each point.
    pub jacobian_step: f64,
    pub newton: NewtonOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            initial_step: None,
            min_step_fraction: 1e-6,
            hopf_tolerance: 1e-4,
            max_state_jump: 0.1,
            jacobian_step: 1e-6,
            newton: NewtonOptions::default(),
        }
    }
}

pub fn linearize_at<F>(rhs: &F, x: &DVector<f64>, p: f64, rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>, f64) -> DVector<f64>,
{
    Ok(numerical_jacobian_scaled(|v| rhs(v, p), x, rel_step)?)
}

struct Tracer<'a, F> {
    rhs: &'a F,
    opts: &'a SweepOptions,
}

impl<F> Tracer<'_, F>
where
    F: Fn(&DVector<f64>, f64) -> DVector<f64>,
{
    fn solve(&self, warm: &DVector<f64>, p: f64) -> Result<DVector<f64>> {
        let eq = find_equilibrium(|v| (self.rhs)(v, p), warm, &self.opts.newton)?;
        if (&eq.state - warm).amax() > self.opts.max_state_jump {
            return Err(Error::NoConvergence {
                residual: eq.residual,
                iterations: eq.iterations,
            });
        }
        Ok(eq.state)
    }

    fn point(&self, state: DVector<f64>, p: f64) -> Result<BranchPoint> {
        let jacobian = linearize_at(self.rhs, &state, p, self.opts.jacobian_step)?;
        let eigenvalues = eigenvalues(&jacobian)?;
        let class = StabilityClass::of(&eigenvalues);
        Ok(BranchPoint {
            param: p,
            state,
            jacobian,
            eigenvalues,
            class,
        })
    }

    /// Bisects between two points whose complex-pair real parts differ in
    /// sign until the pair is within the Hopf tolerance of the axis.
    fn refine_hopf(&self, lo: &BranchPoint, hi: &BranchPoint) -> Result<BranchPoint> {
        let (mut a, mut b) = (lo.clone(), hi.clone());
        let sign_a = a.max_complex_real().unwrap_or(0.0) > 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (a.param + b.param);
            let state = self.solve(&a.state, mid)?;
            let m = self.point(state, mid)?;
            let re = m.max_complex_real().unwrap_or(f64::NAN);
            if re.abs() < self.opts.hopf_tolerance {
                return Ok(m);
            }
            if (re > 0.0) == sign_a {
                a = m;
            } else {
                b = m;
            }
        }
        // Bracket collapsed without meeting the tolerance; return the closer end.
        let ra = a.max_complex_real().unwrap_or(f64::INFINITY).abs();
        let rb = b.max_complex_real().unwrap_or(f64::INFINITY).abs();
        Ok(if ra <= rb { a } else { b })
    }

    /// Solves for the equilibrium with component `k` pinned at `s`, freeing
    /// the parameter instead. Returns `(state, param)`.
    fn pinned(
        &self,
        k: usize,
        s: f64,
        warm: &DVector<f64>,
        p_warm: f64,
    ) -> Result<(DVector<f64>, f64)> {
        let n = warm.len();
        let unpack = |y: &DVector<f64>| {
            let mut x = DVector::zeros(n);
            let mut c = 0;
            for i in 0..n {
                x[i] = if i == k {
                    s
                } else {
                    c += 1;
                    y[c - 1]
                };
            }
            (x, y[n - 1])
        };
        let mut y0 = DVector::zeros(n);
        for (c, i) in (0..n).filter(|&i| i != k).enumerate() {
            y0[c] = warm[i];
        }
        y0[n - 1] = p_warm;
        let g = |y: &DVector<f64>| {
            let (x, p) = unpack(y);
            (self.rhs)(&x, p)
        };
        let eq = find_equilibrium(g, &y0, &self.opts.newton)?;
        let y = polish(g, &eq.state, 3, self.opts.newton.jacobian_step)?;
        Ok(unpack(&y))
    }

    /// Locates the turning point past the last branch point by pinning the
    /// state component that moves most along the critical direction and
    /// maximizing the parameter over it.
    fn refine_fold(&self, prev: &BranchPoint, last: &BranchPoint) -> Result<FoldPoint> {
        let eig = eig_biorthogonal(&last.jacobian)?;
        let crit = (0..eig.len())
            .filter(|&i| eig.values[i].im == 0.0)
            .min_by(|&i, &j| eig.values[i].norm().total_cmp(&eig.values[j].norm()))
            .ok_or(Error::BranchTerminated { param: last.param })?;
        let w = eig.right_vector(crit);
        let k = (0..w.len())
            .max_by(|&i, &j| w[i].norm().total_cmp(&w[j].norm()))
            .unwrap_or(0);
        let direction = if last.state[k] >= prev.state[k] {
            1.0
        } else {
            -1.0
        };

        // The critical real eigenvalue changes sign at the turn. March along
        // the pinned coordinate until it does, then bisect.
        let crit_sign = |x: &DVector<f64>, p: f64| -> Result<bool> {
            let j = linearize_at(self.rhs, x, p, self.opts.jacobian_step)?;
            let ev = eigenvalues(&j)?;
            let l = ev
                .iter()
                .filter(|l| l.im == 0.0)
                .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
                .ok_or(Error::BranchTerminated { param: last.param })?;
            Ok(l.re > 0.0)
        };
        let s0 = last.state[k];
        let scale = s0.abs().max(1.0);
        let sign_a = crit_sign(&prev.state, prev.param)?;
        let (mut a, mut xa, mut pa) = (prev.state[k], prev.state.clone(), prev.param);
        let mut b = None;
        if crit_sign(&last.state, last.param)? != sign_a {
            b = Some(s0);
        } else {
            (a, xa, pa) = (s0, last.state.clone(), last.param);
            let mut ds = (s0 - prev.state[k]).abs().max(1e-6 * scale);
            let mut budget = 10_000;
            while b.is_none() && ds > 1e-14 * scale && budget > 0 {
                budget -= 1;
                let s = a + direction * ds;
                match self.pinned(k, s, &xa, pa) {
                    Ok((x, p)) if (&x - &xa).amax() <= self.opts.max_state_jump => {
                        if crit_sign(&x, p)? == sign_a {
                            (a, xa, pa) = (s, x, p);
                        } else {
                            b = Some(s);
                        }
                    }
                    _ => ds *= 0.5,
                }
            }
        }
        let mut b = b.ok_or(Error::BranchTerminated { param: last.param })?;
        while (b - a).abs() > 1e-13 * scale {
            let mid = 0.5 * (a + b);
            let (x, p) = self.pinned(k, mid, &xa, pa)?;
            if crit_sign(&x, p)? == sign_a {
                (a, xa, pa) = (mid, x, p);
            } else {
                b = mid;
            }
        }
        Ok(FoldPoint {
            param: pa,
            state: xa,
            component: k,
            direction,
        })
    }
}

/// Traces the equilibrium branch of `rhs` from `guess` at `lo` towards `hi`.
pub fn sweep_equilibria<F>(
    rhs: F,
    guess: &DVector<f64>,
    lo: f64,
    hi: f64,
    opts: &SweepOptions,
) -> Result<EquilibriumBranch>
where
    F: Fn(&DVector<f64>, f64) -> DVector<f64>,
{
    if !(lo < hi) {
        return Err(Error::Validation(format!(
            "sweep range [{lo}, {hi}] is empty"
        )));
    }
    let tracer = Tracer { rhs: &rhs, opts };
    let range = hi - lo;
    let nominal = opts.initial_step.unwrap_or(range / 200.0);
    let floor = opts.min_step_fraction * range;

    let x0 = find_equilibrium(|v| rhs(v, lo), guess, &opts.newton)?.state;
    let mut points = vec![tracer.point(x0, lo)?];
    let mut bifurcations = Vec::new();
    let mut h = nominal;
    let termination = loop {
        let last = points.last().expect("non-empty");
        if last.param >= hi {
            break Termination::ReachedEnd;
        }
        let p = (last.param + h).min(hi);
        let next = match tracer.solve(&last.state, p) {
            Ok(x) => tracer.point(x, p)?,
            Err(_) => {
                h *= 0.5;
                if h < floor {
                    break Termination::StepFloor { param: last.param };
                }
                continue;
            }
        };
        if let (Some(a), Some(b)) = (last.max_complex_real(), next.max_complex_real()) {
            if (a > 0.0) != (b > 0.0) {
                let hopf = tracer.refine_hopf(last, &next)?;
                bifurcations.push(Bifurcation {
                    kind: BifurcationKind::Hopf,
                    point: hopf,
                });
            }
        }
        if let (Some(a), Some(b)) = (last.max_real_real(), next.max_real_real()) {
            if (a > 0.0) != (b > 0.0) {
                bifurcations.push(Bifurcation {
                    kind: BifurcationKind::SaddleNode,
                    point: next.clone(),
                });
            }
        }
        points.push(next);
        h = (2.0 * h).min(nominal);
    };

    let mut fold = None;
    if let Termination::StepFloor { param } = termination {
        let n = points.len();
        let refined = if n >= 2 {
            tracer.refine_fold(&points[n - 2], &points[n - 1]).ok()
        } else {
            None
        };
        let point = match &refined {
            Some(f) => tracer.point(f.state.clone(), f.param)?,
            None => points[n - 1].clone(),
        };
        debug_assert!(point.param >= param - floor);
        bifurcations.push(Bifurcation {
            kind: BifurcationKind::SaddleNode,
            point,
        });
        fold = refined;
    }
    Ok(EquilibriumBranch {
        points,
        bifurcations,
        termination,
        fold,
    })
}

/// Equilibrium on the traced branch whose pinned fold coordinate sits
/// `offset` before the fold.
pub fn near_fold_point<F>(
    rhs: F,
    fold: &FoldPoint,
    offset: f64,
    opts: &SweepOptions,
) -> Result<BranchPoint>
where
    F: Fn(&DVector<f64>, f64) -> DVector<f64>,
{
    let tracer = Tracer { rhs: &rhs, opts };
    let s = fold.state[fold.component] - fold.direction * offset;
    let (x, p) = tracer.pinned(fold.component, s, &fold.state, fold.param)?;
    tracer.point(x, p)
}
