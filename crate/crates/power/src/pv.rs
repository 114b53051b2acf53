//! Loading sweeps of the multi-machine model: power flow, machine
//! initialization, linearization, reduction and discretization per point.

use itflow::numerics::eigenvalues;
use itflow::{discretize, ContinuousLti, DiscreteLti};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::continuation::StabilityClass;
use crate::dynamics::{
    initialize_dynamic_states, kron_reduce, linearize_dae, state_labels, OperatingPoint,
};
use crate::error::{Error, Result};
use crate::network::PowerNetworkModel;
use crate::powerflow::{solve_power_flow_from, PowerFlowSolution};

#[derive(Debug, Clone, PartialEq)]
pub enum LoadingSchedule {
    /// Exactly these loadings, in order.
    List(Vec<f64>),
    /// March from `start` in steps of `step`, halving the step whenever the
    /// next point fails (or turns unstable, with `refine_instability`) and
    /// stopping once the step falls below `min_step` or `max` is passed.
    Adaptive {
        start: f64,
        step: f64,
        min_step: f64,
        max: f64,
        refine_instability: bool,
    },
}

impl LoadingSchedule {
    /// Fixed steps of `step` from `start` until the power flow fails or
    /// `max` is reached; unstable points are kept.
    pub fn uniform(start: f64, step: f64, max: f64) -> Self {
        Self::Adaptive {
            start,
            step,
            min_step: step,
            max,
            refine_instability: false,
        }
    }

    /// Unit loading upward in steps of 0.01, stopping at the nose of the
    /// power-flow curve.
    pub fn standard() -> Self {
        Self::uniform(1.0, 0.01, 10.0)
    }

    /// As [`LoadingSchedule::standard`] but homing in on the first loss of
    /// stability to within 1e-5.
    pub fn to_instability() -> Self {
        Self::Adaptive {
            start: 1.0,
            step: 0.01,
            min_step: 1e-5,
            max: 10.0,
            refine_instability: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvPoint {
    pub loading: f64,
    pub power_flow: PowerFlowSolution,
    pub op: OperatingPoint,
    pub a_cont: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub class: StabilityClass,
    /// Discretized model, absent when `a_cont` is not Hurwitz: steady-state
    /// transfer needs a stationary covariance.
    pub lti: Option<DiscreteLti>,
}

impl PvPoint {
    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PvTermination {
    /// Every requested loading was processed.
    Completed,
    /// The first loading that could not be processed, and why.
    Stopped { loading: f64, error: Error },
    /// The marching step fell below its floor next to `loading`, the last
    /// point that failed or lost stability.
    Resolved { loading: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvSweep {
    pub labels: Vec<String>,
    pub points: Vec<PvPoint>,
    pub termination: PvTermination,
}

impl PvSweep {
    /// Points before the first one that is not stable.
    pub fn stable_prefix(&self) -> &[PvPoint] {
        let end = self
            .points
            .iter()
            .position(|p| p.lti.is_none())
            .unwrap_or(self.points.len());
        &self.points[..end]
    }
}

/// Full pipeline at one loading, warm-started from `start`.
pub fn linearize_at_loading(
    model: &PowerNetworkModel,
    loading: f64,
    start: Option<&PowerFlowSolution>,
    tau: f64,
    sigma: f64,
) -> Result<PvPoint> {
    let power_flow = solve_power_flow_from(model, loading, start)?;
    let op = initialize_dynamic_states(model, &power_flow)?;
    let a_cont = kron_reduce(&linearize_dae(model, &op)?)?;
    let eigenvalues = eigenvalues(&a_cont)?;
    let class = StabilityClass::of(&eigenvalues);
    let lti = if class == StabilityClass::Stable {
        let cont = ContinuousLti::new(a_cont.clone(), state_labels(model)?)?;
        Some(discretize(&cont, tau, sigma)?)
    } else {
        None
    };
    Ok(PvPoint {
        loading,
        power_flow,
        op,
        a_cont,
        eigenvalues,
        class,
        lti,
    })
}

pub fn pv_sweep(
    model: &PowerNetworkModel,
    schedule: &LoadingSchedule,
    tau: f64,
    sigma: f64,
) -> Result<PvSweep> {
    model.validate()?;
    if !(tau > 0.0) || !(sigma > 0.0) {
        return Err(itflow::Error::InvalidArgument(format!(
            "need tau > 0 and sigma > 0, got {tau}, {sigma}"
        ))
        .into());
    }
    let labels = state_labels(model)?;
    let mut points: Vec<PvPoint> = Vec::new();
    let termination = match schedule {
        LoadingSchedule::List(loadings) => {
            let mut end = PvTermination::Completed;
            for &lambda in loadings {
                let start = points.last().map(|p| &p.power_flow);
                match linearize_at_loading(model, lambda, start, tau, sigma) {
                    Ok(p) => points.push(p),
                    Err(error) => {
                        end = PvTermination::Stopped {
                            loading: lambda,
                            error,
                        };
                        break;
                    }
                }
            }
            end
        }
        &LoadingSchedule::Adaptive {
            start,
            step,
            min_step,
            max,
            refine_instability,
        } => {
            if !(step > 0.0) || !(min_step > 0.0) || !(max >= start) {
                return Err(itflow::Error::InvalidArgument(format!(
                    "adaptive schedule needs step > 0, min_step > 0, max >= start; got {schedule:?}"
                ))
                .into());
            }
            let first = match linearize_at_loading(model, start, None, tau, sigma) {
                Ok(p) => p,
                Err(error) => {
                    return Ok(PvSweep {
                        labels,
                        points,
                        termination: PvTermination::Stopped {
                            loading: start,
                            error,
                        },
                    })
                }
            };
            let mut unstable = first.class != StabilityClass::Stable;
            points.push(first);
            let mut h = step;
            loop {
                let last = points.last().expect("at least the first point");
                if refine_instability && unstable {
                    break PvTermination::Resolved {
                        loading: last.loading,
                        reason: "not stable at the first point".into(),
                    };
                }
                // Keep grid loadings printable (1.23, not 1.2300000000000002).
                let lambda = ((last.loading + h) * 1e12).round() / 1e12;
                if lambda > max + 1e-12 {
                    break PvTermination::Completed;
                }
                let outcome =
                    linearize_at_loading(model, lambda, Some(&last.power_flow), tau, sigma);
                let reject = match &outcome {
                    Err(e) => Some(e.to_string()),
                    Ok(p) if refine_instability && p.class != StabilityClass::Stable => {
                        Some(format!("{} (max real part {:.3e})", p.class, p.max_real()))
                    }
                    Ok(_) => None,
                };
                match reject {
                    Some(reason) => {
                        h /= 2.0;
                        if h < min_step {
                            break PvTermination::Resolved {
                                loading: lambda,
                                reason,
                            };
                        }
                    }
                    None => {
                        let p = outcome.expect("accepted points are Ok");
                        unstable = p.class != StabilityClass::Stable;
                        points.push(p);
                    }
                }
            }
        }
    };
    Ok(PvSweep {
        labels,
        points,
        termination,
    })
}
