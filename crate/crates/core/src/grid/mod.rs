//! Network data model shared by every solver and factor module.
//!
//! All electrical quantities are stored in per-unit on `base_mva`; angles in
//! radians. Buses are re-indexed densely from zero in file order, and each
//! [`Bus`] keeps its external `number` for reporting.

mod matpower;
mod ybus;

pub use matpower::{parse_case, write_case};
pub use ybus::{build_ybus, AdmittanceMatrix, BranchAdmittance};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Dense zero-based index.
    pub id: usize,
    /// Bus number as it appears in the case file.
    pub number: usize,
    pub kind: BusKind,
    pub v_min: f64,
    pub v_max: f64,
    pub base_kv: f64,
    /// Shunt admittance at nominal voltage, pu.
    pub shunt_admittance: Complex64,
    /// Initial voltage magnitude, pu.
    pub vm: f64,
    /// Initial voltage angle, rad.
    pub va: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance, pu.
    pub b: f64,
    /// Apparent power limit, pu. Zero means unlimited.
    pub s_max: f64,
    /// Off-nominal tap ratio magnitude (1.0 for lines).
    pub tap: f64,
    /// Phase shift, rad.
    pub shift: f64,
    pub in_service: bool,
    pub angle_diff_min: f64,
    pub angle_diff_max: f64,
}

impl Branch {
    pub fn series_admittance(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) / Complex64::new(self.r, self.x)
    }

    pub fn charging_admittance(&self) -> Complex64 {
        Complex64::new(0.0, self.b)
    }

    pub fn is_transformer(&self) -> bool {
        self.tap != 1.0 || self.shift != 0.0
    }

    pub fn has_flow_limit(&self) -> bool {
        self.s_max > 0.0
    }

    /// Whether this branch touches `bus`.
    pub fn touches(&self, bus: usize) -> bool {
        self.from_bus == bus || self.to_bus == bus
    }
}

/// Polynomial generation cost in $/h with `p` in MW.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraticCost {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuadraticCost {
    pub fn eval(&self, p_mw: f64) -> f64 {
        self.c2 * p_mw * p_mw + self.c1 * p_mw + self.c0
    }

    pub fn derivative(&self, p_mw: f64) -> f64 {
        2.0 * self.c2 * p_mw + self.c1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Scheduled active output, pu.
    pub p_set: f64,
    /// Scheduled reactive output, pu.
    pub q_set: f64,
    /// Voltage magnitude setpoint, pu.
    pub v_set: f64,
    pub in_service: bool,
    pub cost: QuadraticCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    /// Complex demand, pu.
    pub demand: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl Network {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn slack(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated network has a slack bus")
    }

    /// Maps external bus numbers to dense ids.
    pub fn number_map(&self) -> BTreeMap<usize, usize> {
        self.buses.iter().map(|b| (b.number, b.id)).collect()
    }

    pub fn bus_id(&self, number: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.number == number)
    }

    pub fn bus_number(&self, id: usize) -> usize {
        self.buses[id].number
    }

    pub fn active_generators(&self) -> impl Iterator<Item = (usize, &Generator)> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.in_service)
    }

    pub fn active_branches(&self) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches.iter().enumerate().filter(|(_, b)| b.in_service)
    }

    /// Per-bus complex demand, pu.
    pub fn bus_demand(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.n_buses()];
        for l in &self.loads {
            d[l.bus] += l.demand;
        }
        d
    }

    pub fn total_demand(&self) -> Complex64 {
        self.loads.iter().map(|l| l.demand).sum()
    }

    /// Buses hosting at least one in-service generator.
    pub fn generator_buses(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.active_generators().map(|(_, g)| g.bus).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Copy of the network with branch `idx` taken out of service.
    pub fn with_branch_out(&self, idx: usize) -> Network {
        let mut net = self.clone();
        net.branches[idx].in_service = false;
        net
    }

    /// Neighbour lists over in-service branches; parallel circuits collapse.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_buses()];
        for (_, br) in self.active_branches() {
            adj[br.from_bus].push(br.to_bus);
            adj[br.to_bus].push(br.from_bus);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Buses reachable from `start` over in-service branches.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n_buses()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_buses();
        if n == 0 {
            return Err(Error::Validation("network has no buses".into()));
        }
        if self.base_mva <= 0.0 {
            return Err(Error::Validation("base MVA must be positive".into()));
        }
        let slacks = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .count();
        if slacks != 1 {
            return Err(Error::Validation(format!(
                "expected exactly one slack bus, found {slacks}"
            )));
        }
        for (i, b) in self.buses.iter().enumerate() {
            if b.id != i {
                return Err(Error::Validation(format!("bus {} has id {} at position {i}", b.number, b.id)));
            }
            if !(b.v_min > 0.0) || b.v_min > b.v_max {
                return Err(Error::Validation(format!(
                    "bus {}: voltage bounds [{}, {}] invalid",
                    b.number, b.v_min, b.v_max
                )));
            }
        }
        let mut numbers: Vec<usize> = self.buses.iter().map(|b| b.number).collect();
        numbers.sort_unstable();
        if numbers.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate bus numbers".into()));
        }
        for (i, br) in self.branches.iter().enumerate() {
            if br.from_bus >= n || br.to_bus >= n {
                return Err(Error::Validation(format!("branch {i} references unknown bus")));
            }
            if br.from_bus == br.to_bus {
                return Err(Error::Validation(format!("branch {i} is a self loop")));
            }
            if br.r == 0.0 && br.x == 0.0 {
                return Err(Error::Validation(format!("branch {i} has zero impedance")));
            }
            if br.s_max < 0.0 {
                return Err(Error::Validation(format!("branch {i} has negative rating")));
            }
            if br.tap <= 0.0 {
                return Err(Error::Validation(format!("branch {i} has non-positive tap")));
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.bus >= n {
                return Err(Error::Validation(format!("generator {i} references unknown bus")));
            }
            if g.p_min > g.p_max || g.q_min > g.q_max {
                return Err(Error::Validation(format!("generator {i} has inverted limits")));
            }
            if g.cost.c2 < 0.0 {
                return Err(Error::Validation(format!("generator {i} has concave cost")));
            }
        }
        for (i, l) in self.loads.iter().enumerate() {
            if l.bus >= n {
                return Err(Error::Validation(format!("load {i} references unknown bus")));
            }
            if !l.demand.re.is_finite() || !l.demand.im.is_finite() {
                return Err(Error::Validation(format!("load {i} is not finite")));
            }
        }
        // connectivity with every branch in service
        let mut all_in = self.clone();
        for br in &mut all_in.branches {
            br.in_service = true;
        }
        if all_in.reachable_from(self.slack()).iter().any(|r| !r) {
            return Err(Error::Validation("network is not connected".into()));
        }
        Ok(())
    }

    /// Canonical JSON with stable key order.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let net: Network = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}

#[cfg(test)]
pub(crate) mod testnets {
    //! Small hand-built networks used across the unit tests.
    use super::*;

    fn bus(id: usize, kind: BusKind) -> Bus {
        Bus {
            id,
            number: id + 1,
            kind,
            v_min: 0.9,
            v_max: 1.1,
            base_kv: 100.0,
            shunt_admittance: Complex64::new(0.0, 0.0),
            vm: 1.0,
            va: 0.0,
        }
    }

    pub fn line(from: usize, to: usize, r: f64, x: f64, b: f64) -> Branch {
        Branch {
            from_bus: from,
            to_bus: to,
            r,
            x,
            b,
            s_max: 2.0,
            tap: 1.0,
            shift: 0.0,
            in_service: true,
            angle_diff_min: -std::f64::consts::TAU,
            angle_diff_max: std::f64::consts::TAU,
        }
    }

    pub fn gen(bus: usize, p_max: f64) -> Generator {
        Generator {
            bus,
            p_min: 0.0,
            p_max,
            q_min: -p_max,
            q_max: p_max,
            p_set: 0.0,
            q_set: 0.0,
            v_set: 1.0,
            in_service: true,
            cost: QuadraticCost {
                c2: 0.01,
                c1: 10.0,
                c0: 0.0,
            },
        }
    }

    /// Slack at bus 0 plus `kinds` for the remaining buses.
    pub fn network(kinds: &[BusKind], branches: Vec<Branch>) -> Network {
        let mut buses = vec![bus(0, BusKind::Slack)];
        buses.extend(kinds.iter().enumerate().map(|(i, &k)| bus(i + 1, k)));
        Network {
            base_mva: 100.0,
            buses,
            branches,
            generators: vec![gen(0, 5.0)],
            loads: Vec::new(),
        }
    }

    /// Two buses joined by one line, load on bus 1.
    pub fn two_bus(load: Complex64) -> Network {
        let mut net = network(&[BusKind::Pq], vec![line(0, 1, 0.01, 0.1, 0.0)]);
        if load.norm() > 0.0 {
            net.loads.push(Load { bus: 1, demand: load });
        }
        net
    }

    /// Symmetric triangle: slack 0, loads on 1 and 2.
    pub fn triangle(load: f64) -> Network {
        let mut net = network(
            &[BusKind::Pq, BusKind::Pq],
            vec![
                line(0, 1, 0.01, 0.1, 0.0),
                line(1, 2, 0.01, 0.1, 0.0),
                line(0, 2, 0.01, 0.1, 0.0),
            ],
        );
        for b in [1, 2] {
            net.loads.push(Load {
                bus: b,
                demand: Complex64::new(load, load * 0.2),
            });
        }
        net
    }
}
