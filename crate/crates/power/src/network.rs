//! Multi-machine network description and admittance matrix.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BusType {
    #[serde(rename = "slack")]
    Slack,
    #[serde(rename = "PV")]
    Pv,
    #[serde(rename = "PQ")]
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: usize,
    #[serde(rename = "type")]
    pub kind: BusType,
    /// Voltage magnitude setpoint; only read at slack and PV buses.
    #[serde(default = "one")]
    pub v_set: f64,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub q_load: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
    /// Off-nominal turns ratio on the `from` side.
    #[serde(default = "one")]
    pub tap: f64,
}

/// Flux-decay machine with a single-time-constant exciter. Angles in rad,
/// speeds in rad/s, everything else per unit on the system base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub name: String,
    pub bus: usize,
    /// Inertia constant `2H/ω_s`.
    pub m: f64,
    pub d: f64,
    pub x_d: f64,
    pub x_d_prime: f64,
    pub x_q: f64,
    pub t_do_prime: f64,
    pub k_a: f64,
    pub t_a: f64,
    /// Mechanical power at unit loading. The slack machine's value is
    /// replaced by whatever the power flow assigns it.
    pub t_m: f64,
    #[serde(default)]
    pub r_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pss {
    pub generator: String,
    pub k_pss: f64,
    pub t_w: f64,
    pub t_num: f64,
    pub t_den: f64,
    #[serde(default = "yes")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerNetworkModel {
    pub base_mva: f64,
    #[serde(default = "sixty")]
    pub frequency_hz: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub pss: Vec<Pss>,
}

fn one() -> f64 {
    1.0
}

fn sixty() -> f64 {
    60.0
}

fn yes() -> bool {
    true
}

impl PowerNetworkModel {
    pub fn omega_s(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }

    /// Position of each bus id in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(k, b)| (b.id, k))
            .collect()
    }

    pub fn slack(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.kind == BusType::Slack)
    }

    /// Enabled stabilizer of each generator, in generator order.
    pub fn stabilizers(&self) -> Vec<Option<&Pss>> {
        self.generators
            .iter()
            .map(|g| self.pss.iter().find(|p| p.enabled && p.generator == g.name))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if !(self.base_mva > 0.0) || !(self.frequency_hz > 0.0) {
            return bad("base_mva and frequency_hz must be positive".into());
        }
        let mut seen = HashMap::new();
        for b in &self.buses {
            if seen.insert(b.id, ()).is_some() {
                return bad(format!("bus id {} appears more than once", b.id));
            }
            if ![b.v_set, b.p_load, b.q_load].iter().all(|v| v.is_finite()) || !(b.v_set > 0.0) {
                return bad(format!(
                    "bus {} has a non-finite load or non-positive setpoint",
                    b.id
                ));
            }
        }
        let slacks: Vec<usize> = self
            .buses
            .iter()
            .filter(|b| b.kind == BusType::Slack)
            .map(|b| b.id)
            .collect();
        match slacks.len() {
            1 => {}
            0 => return bad("exactly one slack bus required, found none".into()),
            _ => {
                let ids: Vec<String> = slacks.iter().map(|i| i.to_string()).collect();
                return bad(format!(
                    "exactly one slack bus required, found {}: buses {}",
                    slacks.len(),
                    ids.join(", ")
                ));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !seen.contains_key(&end) {
                    return bad(format!(
                        "branch {k} ({}-{}) refers to unknown bus {end}",
                        br.from, br.to
                    ));
                }
            }
            if br.from == br.to {
                return bad(format!("branch {k} connects bus {} to itself", br.from));
            }
            if ![br.r, br.x, br.b, br.tap].iter().all(|v| v.is_finite())
                || !(br.tap > 0.0)
                || br.r == 0.0 && br.x == 0.0
            {
                return bad(format!(
                    "branch {k} ({}-{}) has invalid impedance or tap",
                    br.from, br.to
                ));
            }
        }
        let mut gen_buses: HashMap<usize, &str> = HashMap::new();
        let mut names = HashMap::new();
        for g in &self.generators {
            if names.insert(g.name.as_str(), ()).is_some() {
                return bad(format!("generator name {} appears more than once", g.name));
            }
            if g.name.contains('/') || g.name.is_empty() {
                return bad(format!(
                    "generator name {:?} must be non-empty without '/'",
                    g.name
                ));
            }
            let Some(bus) = self.buses.iter().find(|b| b.id == g.bus) else {
                return bad(format!(
                    "generator {} sits on unknown bus {}",
                    g.name, g.bus
                ));
            };
            if bus.kind == BusType::Pq {
                return bad(format!("generator {} sits on PQ bus {}", g.name, g.bus));
            }
            if let Some(other) = gen_buses.insert(g.bus, &g.name) {
                return bad(format!(
                    "generators {other} and {} share bus {}",
                    g.name, g.bus
                ));
            }
            let positive = [g.m, g.x_d, g.x_d_prime, g.x_q, g.t_do_prime, g.k_a, g.t_a];
            if !positive.iter().all(|v| *v > 0.0 && v.is_finite())
                || !(g.d >= 0.0)
                || !(g.r_s >= 0.0)
                || !g.t_m.is_finite()
            {
                return bad(format!(
                    "generator {}: inertia, reactances, gains and time constants must be positive",
                    g.name
                ));
            }
        }
        let mut with_pss = HashMap::new();
        for p in &self.pss {
            if !names.contains_key(p.generator.as_str()) {
                return bad(format!(
                    "stabilizer refers to unknown generator {}",
                    p.generator
                ));
            }
            if p.enabled && with_pss.insert(p.generator.as_str(), ()).is_some() {
                return bad(format!(
                    "generator {} has more than one enabled stabilizer",
                    p.generator
                ));
            }
            if ![p.k_pss, p.t_w, p.t_num, p.t_den]
                .iter()
                .all(|v| v.is_finite())
                || !(p.t_w > 0.0 && p.t_num > 0.0 && p.t_den > 0.0)
            {
                return bad(format!(
                    "stabilizer of {}: time constants must be positive",
                    p.generator
                ));
            }
            if p.enabled && !(p.t_num > p.t_den) {
                return bad(format!(
                    "stabilizer of {}: lead requires t_num > t_den, got {} <= {}",
                    p.generator, p.t_num, p.t_den
                ));
            }
        }
        Ok(())
    }
}

/// Bus admittance matrix in `buses` order. Taps act on the `from` side.
pub fn build_ybus(model: &PowerNetworkModel) -> Result<DMatrix<Complex64>> {
    let index = model.bus_index();
    let n = model.buses.len();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut adjacency = vec![Vec::new(); n];
    for br in &model.branches {
        let (Some(&f), Some(&t)) = (index.get(&br.from), index.get(&br.to)) else {
            return Err(Error::Validation(format!(
                "branch {}-{} refers to an unknown bus",
                br.from, br.to
            )));
        };
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let half_b = Complex64::new(0.0, br.b / 2.0);
        y[(f, f)] += (ys + half_b) / (br.tap * br.tap);
        y[(t, t)] += ys + half_b;
        y[(f, t)] -= ys / br.tap;
        y[(t, f)] -= ys / br.tap;
        adjacency[f].push(t);
        adjacency[t].push(f);
    }
    if n > 0 {
        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([0]);
        reached[0] = true;
        while let Some(k) = queue.pop_front() {
            for &m in &adjacency[k] {
                if !reached[m] {
                    reached[m] = true;
                    queue.push_back(m);
                }
            }
        }
        if let Some(k) = reached.iter().position(|r| !r) {
            return Err(Error::DisconnectedNetwork {
                bus: model.buses[k].id,
                root: model.buses[0].id,
            });
        }
    }
    Ok(y)
}
