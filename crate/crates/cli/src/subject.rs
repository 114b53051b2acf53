//! The model a command operates on.

use itflow::models::{
    mass_spring_damper, participation_counterexample, two_state_example, MassSpringParams,
};
use itflow::{discretize, ContinuousLti, DiscreteLti, GroupSpec};
use itflow_power::continuation::{BranchPoint, SweepOptions, Termination};
use itflow_power::dynamics::{generator_groups, state_labels};
use itflow_power::netfile::{ieee39, parse_model_file};
use itflow_power::network::PowerNetworkModel;
use itflow_power::pv::linearize_at_loading;
use itflow_power::three_bus::{
    three_bus_continuous, three_bus_near_fold, three_bus_sweep, Q1_RANGE,
};

use crate::config::{AnalysisConfig, Demo};
use crate::failure::{Failure, Outcome};

/// Voltage offset above the fold used when no Q1 is given.
pub const NEAR_FOLD_DV: f64 = 3e-5;

pub struct Subject {
    /// Continuous-time linearization, when the model has one.
    pub cont: Option<ContinuousLti>,
    pub disc: DiscreteLti,
    /// Natural grouping of the states (per generator for networks).
    pub groups: Option<GroupSpec>,
}

impl Subject {
    pub fn labels(&self) -> &[String] {
        self.disc.labels()
    }

    fn continuous(cont: ContinuousLti, cfg: &AnalysisConfig) -> Outcome<Self> {
        let disc = discretize(&cont, cfg.tau, cfg.sigma)?;
        Ok(Self {
            cont: Some(cont),
            disc,
            groups: None,
        })
    }
}

/// The network behind `--model` or `--demo ieee39`, if that is what was asked for.
pub fn network(cfg: &AnalysisConfig) -> Outcome<Option<PowerNetworkModel>> {
    match (&cfg.model, cfg.demo) {
        (Some(path), _) => Ok(Some(parse_model_file(path)?)),
        (None, Some(Demo::Ieee39)) => Ok(Some(ieee39())),
        _ => Ok(None),
    }
}

/// Equilibrium of the three-bus system at `q1`, or just above the fold.
pub fn three_bus_point(q1: Option<f64>) -> Outcome<BranchPoint> {
    let opts = SweepOptions::default();
    match q1 {
        None => {
            let branch = three_bus_sweep(Q1_RANGE.0, Q1_RANGE.1, &opts)?;
            let fold = branch.fold.ok_or_else(|| {
                Failure::validation("three-bus branch has no fold in the default range")
            })?;
            Ok(three_bus_near_fold(&fold, NEAR_FOLD_DV, &opts)?)
        }
        Some(q) if q <= Q1_RANGE.0 => Ok(three_bus_sweep(q, Q1_RANGE.0 + 1.0, &opts)?
            .points
            .swap_remove(0)),
        Some(q) => {
            let mut branch = three_bus_sweep(Q1_RANGE.0, q, &opts)?;
            if let Termination::StepFloor { param } = branch.termination {
                return Err(Failure::validation(format!(
                    "no equilibrium at Q1 = {q}: the branch ends near {param}"
                )));
            }
            Ok(branch.points.pop().expect("sweep returns points"))
        }
    }
}

pub fn load(cfg: &AnalysisConfig) -> Outcome<Subject> {
    if let Some(model) = network(cfg)? {
        let loading = cfg.param.unwrap_or(1.0);
        let point = linearize_at_loading(&model, loading, None, cfg.tau, cfg.sigma)?;
        let cont = ContinuousLti::new(point.a_cont, state_labels(&model)?)?;
        let mut s = Subject::continuous(cont, cfg)?;
        s.groups = Some(generator_groups(&model)?);
        return Ok(s);
    }
    match cfg.demo {
        None => Err(Failure::validation("choose a model with --demo or --model")),
        Some(Demo::TwoState) => {
            let base = two_state_example(cfg.mu);
            let disc = DiscreteLti::isotropic(base.a().clone(), cfg.sigma)?
                .with_labels(base.labels().to_vec())?;
            Ok(Subject {
                cont: None,
                disc,
                groups: None,
            })
        }
        Some(Demo::MassSpring) => {
            let mut s = Subject::continuous(mass_spring_damper(MassSpringParams::default())?, cfg)?;
            let groups = vec![("M".to_string(), vec![0, 1]), ("m".to_string(), vec![2, 3])];
            s.groups = Some(GroupSpec::new(4, groups)?);
            Ok(s)
        }
        Some(Demo::PfCounterexample) => Subject::continuous(participation_counterexample(), cfg),
        Some(Demo::ThreeBus) => {
            Subject::continuous(three_bus_continuous(&three_bus_point(cfg.param)?)?, cfg)
        }
        Some(Demo::Ieee39) => unreachable!("handled as a network"),
    }
}
