use itflow::models::{participation_counterexample_with, two_state_example};
use itflow::numerics::eig_biorthogonal;
use itflow::transfer::ModalTarget;
use itflow::{
    discretize, monte_carlo_transfer_oracle, participation_matrix, steady_state_covariance,
    steady_state_transfer, transfer_matrix, transfer_series, transfer_to_mode, transfer_to_target,
    DiscreteLti, GroupSpec, SubspacePartition, TimeIndex, Units,
};
use itflow_power::continuation::{Bifurcation, StabilityClass, SweepOptions};
use itflow_power::network::PowerNetworkModel;
use itflow_power::pv::{pv_sweep, LoadingSchedule, PvTermination};
use itflow_power::three_bus::{three_bus_lti, three_bus_sweep, Q1_RANGE, THREE_BUS_LABELS};
use num_complex::Complex64;

use crate::config::{AnalysisConfig, Command, Demo};
use crate::failure::{Failure, Outcome};
use crate::labels::{parse_groups, resolve, resolve_pair, split_arrow};
use crate::output::{Cell, Table};
use crate::subject::{load, network, Subject};

const TRANSFER_COLUMNS: [&str; 5] = ["t", "source", "target", "value", "units"];

pub fn run(cfg: &AnalysisConfig) -> Outcome<Table> {
    let units = Units::from(cfg.units);
    match &cfg.command {
        Command::Transfer { from, to, steps } => transfer(cfg, from, to, *steps, units),
        Command::TransferMatrix { groups } => {
            let s = load(cfg)?;
            let groups = if groups.is_empty() {
                s.groups
                    .clone()
                    .unwrap_or_else(|| GroupSpec::singletons(s.labels()))
            } else {
                parse_groups(groups, s.labels())?
            };
            pairwise(&s.disc, &groups, units)
        }
        Command::ModeTransfer { from, mode } => mode_transfer(cfg, from.as_deref(), *mode, units),
        Command::Participation { mode } => participation(cfg, *mode),
        Command::Sweep {
            range,
            points,
            transfers,
        } => sweep(cfg, range.as_deref(), *points, transfers, units),
        Command::Oracle {
            from,
            to,
            samples,
            seed,
        } => oracle(cfg, from, to, *samples, *seed, units),
        Command::Demo { name } => demo(cfg, *name, units),
    }
}

fn transfer(
    cfg: &AnalysisConfig,
    from: &str,
    to: &str,
    steps: Option<usize>,
    units: Units,
) -> Outcome<Table> {
    let s = load(cfg)?;
    let (src, tgt) = resolve_pair(from, to, s.labels())?;
    let part = SubspacePartition::new(s.disc.dim(), &src, &tgt)?;
    let results = match steps {
        Some(steps) => transfer_series(&s.disc, &part, s.disc.q(), steps)?,
        None => vec![steady_state_transfer(&s.disc, &part)?],
    };
    let mut table = Table::new(TRANSFER_COLUMNS);
    for r in results {
        table.push(vec![
            time_cell(r.time),
            from.into(),
            to.into(),
            r.in_units(units).into(),
            units.as_str().into(),
        ]);
    }
    Ok(table)
}

fn time_cell(t: TimeIndex) -> Cell {
    match t {
        TimeIndex::Step(k) => k.into(),
        TimeIndex::SteadyState => "steady-state".into(),
    }
}

fn pairwise(disc: &DiscreteLti, groups: &GroupSpec, units: Units) -> Outcome<Table> {
    let m = transfer_matrix(disc, groups)?;
    let mut table = Table::new(TRANSFER_COLUMNS);
    for i in 0..m.len() {
        for j in (0..m.len()).filter(|&j| j != i) {
            let r = m.get(i, j).expect("off-diagonal entries are present");
            table.push(vec![
                time_cell(r.time),
                m.names[i].clone().into(),
                m.names[j].clone().into(),
                r.in_units(units).into(),
                units.as_str().into(),
            ]);
        }
    }
    Ok(table)
}

/// Mode `k` is indexed in the spectrum of the continuous-time matrix when
/// there is one, so indices agree with `participation`.
fn mode_transfer(
    cfg: &AnalysisConfig,
    from: Option<&str>,
    mode: Option<usize>,
    units: Units,
) -> Outcome<Table> {
    let s = load(cfg)?;
    let basis = s.cont.as_ref().map_or(s.disc.a(), |c| c.a());
    let eig = eig_biorthogonal(basis)?;
    let modes: Vec<usize> = match mode {
        Some(k) if k >= eig.len() => {
            return Err(Failure::validation(format!(
                "mode {k} out of range for {} modes",
                eig.len()
            )))
        }
        Some(k) => vec![k],
        // One row per conjugate pair.
        None => (0..eig.len())
            .filter(|&k| eig.conjugate_partner(k).is_none_or(|p| p > k))
            .collect(),
    };
    let sources: Vec<(String, Vec<usize>)> = match from {
        Some(spec) => vec![(spec.to_string(), resolve(spec, s.labels())?)],
        None => s
            .labels()
            .iter()
            .enumerate()
            .map(|(k, l)| (l.clone(), vec![k]))
            .collect(),
    };
    let sigma = steady_state_covariance(&s.disc)?;
    let mut table = Table::new(TRANSFER_COLUMNS.into_iter().chain(["eig_re", "eig_im"]));
    for &k in &modes {
        let target = ModalTarget::from_eigen(&eig, k)?;
        for (name, idx) in &sources {
            let r = transfer_to_target(&s.disc, idx, &target, &sigma, TimeIndex::SteadyState)?;
            table.push(vec![
                time_cell(r.time),
                name.clone().into(),
                format!("mode{k}").into(),
                r.in_units(units).into(),
                units.as_str().into(),
                eig.values[k].re.into(),
                eig.values[k].im.into(),
            ]);
        }
    }
    Ok(table)
}

fn participation(cfg: &AnalysisConfig, mode: Option<usize>) -> Outcome<Table> {
    let s = load(cfg)?;
    let pm = participation_matrix(s.cont.as_ref().map_or(s.disc.a(), |c| c.a()))?;
    let n = pm.eigenvalues.len();
    let modes: Vec<usize> = match mode {
        Some(k) if k >= n => {
            return Err(Failure::validation(format!(
                "mode {k} out of range for {n} modes"
            )))
        }
        Some(k) => vec![k],
        None => (0..n).collect(),
    };
    let mut table = Table::new(
        std::iter::once("state".to_string()).chain(modes.iter().map(|k| format!("mode{k}"))),
    );
    let mags = pm.magnitudes();
    for (row, label) in s.labels().iter().enumerate() {
        let mut cells = vec![Cell::from(label.as_str())];
        cells.extend(modes.iter().map(|&k| Cell::from(mags[(row, k)])));
        table.push(cells);
    }
    for &k in &modes {
        table
            .notes
            .push(format!("mode{k} eigenvalue {}", complex(pm.eigenvalues[k])));
    }
    Ok(table)
}

fn complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn parse_range(range: Option<&str>, default: (f64, f64)) -> Outcome<(f64, f64)> {
    let Some(text) = range else {
        return Ok(default);
    };
    let bad = || Failure::validation(format!("range {text:?} is not LO:HI with LO < HI"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

/// Requested transfer columns resolved against `labels`.
struct Probes {
    names: Vec<String>,
    parts: Vec<SubspacePartition>,
}

impl Probes {
    fn new(specs: &[String], labels: &[String]) -> Outcome<Self> {
        let mut parts = Vec::with_capacity(specs.len());
        for spec in specs {
            let (from, to) = split_arrow(spec)?;
            let (src, tgt) = resolve_pair(from, to, labels)?;
            parts.push(SubspacePartition::new(labels.len(), &src, &tgt)?);
        }
        Ok(Self {
            names: specs.to_vec(),
            parts,
        })
    }

    fn cells(&self, disc: Option<&DiscreteLti>, units: Units) -> Outcome<Vec<Cell>> {
        self.parts
            .iter()
            .map(|part| match disc {
                Some(d) => Ok(steady_state_transfer(d, part)?.in_units(units).into()),
                None => Ok(Cell::Empty),
            })
            .collect()
    }
}

fn sweep_table(probes: &Probes) -> Table {
    Table::new(
        ["param", "max_re_eig", "class"]
            .into_iter()
            .map(String::from)
            .chain(probes.names.iter().cloned()),
    )
}

fn sweep(
    cfg: &AnalysisConfig,
    range: Option<&str>,
    points: Option<usize>,
    transfers: &[String],
    units: Units,
) -> Outcome<Table> {
    if points == Some(0) {
        return Err(Failure::validation("--points must be positive"));
    }
    if let Some(model) = network(cfg)? {
        return network_sweep(cfg, &model, range, points, transfers, units);
    }
    match cfg.demo {
        Some(Demo::ThreeBus) => three_bus_table(cfg, range, points, transfers, units),
        Some(other) => Err(Failure::validation(format!(
            "{other:?} has no sweep parameter; use three-bus or a network"
        ))),
        None => Err(Failure::validation("choose a model with --demo or --model")),
    }
}

/// Bifurcation rows carry `S1`, `S2`, ... in the class column, numbered in
/// parameter order.
fn three_bus_table(
    cfg: &AnalysisConfig,
    range: Option<&str>,
    points: Option<usize>,
    transfers: &[String],
    units: Units,
) -> Outcome<Table> {
    let (lo, hi) = parse_range(range, Q1_RANGE)?;
    let opts = SweepOptions {
        initial_step: points.map(|n| (hi - lo) / n as f64),
        ..SweepOptions::default()
    };
    let branch = three_bus_sweep(lo, hi, &opts)?;
    let labels = THREE_BUS_LABELS.map(String::from).to_vec();
    let probes = Probes::new(transfers, &labels)?;
    let mut table = sweep_table(&probes);

    let mut events = branch.bifurcations.iter().enumerate().peekable();
    for p in &branch.points {
        while let Some((k, ev)) = events.next_if(|(_, e)| e.point.param <= p.param) {
            table.push(event_row(k, ev, &probes, units)?);
        }
        let disc = match p.class {
            StabilityClass::Stable => Some(three_bus_lti(p, cfg.tau, cfg.sigma)?),
            _ => None,
        };
        let mut row = vec![p.param.into(), p.max_real().into(), p.class.as_str().into()];
        row.extend(probes.cells(disc.as_ref(), units)?);
        table.push(row);
    }
    for (k, ev) in events {
        table.push(event_row(k, ev, &probes, units)?);
    }
    if let Some(fold) = &branch.fold {
        table
            .notes
            .push(format!("branch ends at a fold near Q1 = {}", fold.param));
    }
    Ok(table)
}

fn event_row(k: usize, ev: &Bifurcation, probes: &Probes, units: Units) -> Outcome<Vec<Cell>> {
    let class = format!("S{}-{}", k + 1, ev.kind.as_str());
    let mut row = vec![
        ev.point.param.into(),
        ev.point.max_real().into(),
        class.into(),
    ];
    row.extend(probes.cells(None, units)?);
    Ok(row)
}

fn network_sweep(
    cfg: &AnalysisConfig,
    model: &PowerNetworkModel,
    range: Option<&str>,
    points: Option<usize>,
    transfers: &[String],
    units: Units,
) -> Outcome<Table> {
    let (lo, hi) = parse_range(range, (1.0, 10.0))?;
    let step = points.map_or(0.01, |n| (hi - lo) / n as f64);
    let result = pv_sweep(
        model,
        &LoadingSchedule::uniform(lo, step, hi),
        cfg.tau,
        cfg.sigma,
    )?;
    let probes = Probes::new(transfers, &result.labels)?;
    let mut table = sweep_table(&probes);
    for p in &result.points {
        let mut row = vec![
            p.loading.into(),
            p.max_real().into(),
            p.class.as_str().into(),
        ];
        row.extend(probes.cells(p.lti.as_ref(), units)?);
        table.push(row);
    }
    match &result.termination {
        PvTermination::Completed => {}
        PvTermination::Stopped { loading, error } => table
            .notes
            .push(format!("stopped at loading {loading}: {error}")),
        PvTermination::Resolved { loading, reason } => table
            .notes
            .push(format!("stopped at loading {loading}: {reason}")),
    }
    Ok(table)
}

fn oracle(
    cfg: &AnalysisConfig,
    from: &str,
    to: &str,
    samples: usize,
    seed: u64,
    units: Units,
) -> Outcome<Table> {
    let s = load(cfg)?;
    let (src, tgt) = resolve_pair(from, to, s.labels())?;
    let part = SubspacePartition::new(s.disc.dim(), &src, &tgt)?;
    let sigma = steady_state_covariance(&s.disc)?;
    let exact = steady_state_transfer(&s.disc, &part)?.value;
    let estimate = monte_carlo_transfer_oracle(&s.disc, &part, &sigma, samples, seed)?;
    let mut table = Table::new([
        "source",
        "target",
        "closed_form",
        "monte_carlo",
        "abs_diff",
        "samples",
        "seed",
        "units",
    ]);
    table.push(vec![
        from.into(),
        to.into(),
        units.convert(exact).into(),
        units.convert(estimate).into(),
        units.convert((exact - estimate).abs()).into(),
        samples.into(),
        Cell::Text(seed.to_string()),
        units.as_str().into(),
    ]);
    Ok(table)
}

fn demo(cfg: &AnalysisConfig, name: Demo, units: Units) -> Outcome<Table> {
    let u = units.as_str();
    match name {
        Demo::TwoState => {
            let mut table = Table::new(["mu", "y->x", "x->y", "units"]);
            for mu in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99] {
                let base = two_state_example(mu);
                let sys = DiscreteLti::isotropic(base.a().clone(), cfg.sigma)?;
                let yx = steady_state_transfer(&sys, &SubspacePartition::new(2, &[1], &[0])?)?;
                let xy = steady_state_transfer(&sys, &SubspacePartition::new(2, &[0], &[1])?)?;
                table.push(vec![
                    mu.into(),
                    yx.in_units(units).into(),
                    xy.in_units(units).into(),
                    u.into(),
                ]);
            }
            Ok(table)
        }
        Demo::MassSpring => {
            let cont = itflow::models::mass_spring_damper(Default::default())?;
            let big = SubspacePartition::new(4, &[0, 1], &[2, 3])?;
            let small = SubspacePartition::new(4, &[2, 3], &[0, 1])?;
            let mut table = Table::new(["tau", "M->m", "m->M", "units"]);
            for tau in [0.01, 0.05, 0.1, 0.2, 0.5] {
                let sys = discretize(&cont, tau, cfg.sigma)?;
                let a = steady_state_transfer(&sys, &big)?.in_units(units);
                let b = steady_state_transfer(&sys, &small)?.in_units(units);
                table.push(vec![tau.into(), a.into(), b.into(), u.into()]);
            }
            Ok(table)
        }
        Demo::PfCounterexample => {
            let mut table = Table::new([
                "coupling",
                "max_offdiag_participation",
                "x2->mode0",
                "units",
            ]);
            for coupling in [3.4657, 0.0] {
                let cont = participation_counterexample_with(coupling);
                let pm = participation_matrix(cont.a())?.magnitudes();
                let off = pm[(0, 1)].max(pm[(1, 0)]);
                let sys = discretize(&cont, cfg.tau, cfg.sigma)?;
                let t = transfer_to_mode(&sys, &[1], 0)?.in_units(units);
                table.push(vec![coupling.into(), off.into(), t.into(), u.into()]);
            }
            Ok(table)
        }
        Demo::ThreeBus => {
            let probes = ["delta_g->*".to_string(), "V->*".to_string()];
            three_bus_table(cfg, None, None, &probes, units)
        }
        Demo::Ieee39 => {
            let cfg = AnalysisConfig {
                demo: Some(Demo::Ieee39),
                model: None,
                ..cfg.clone()
            };
            let s: Subject = load(&cfg)?;
            pairwise(
                &s.disc,
                s.groups.as_ref().expect("networks are grouped"),
                units,
            )
        }
    }
}
