//! Table-shaped views of results, keyed by external bus numbers.

use serde::{Deserialize, Serialize};

use crate::grid::Network;
use crate::opf::{CyberOpfResult, OpfSolution};
use crate::powerflow::SystemState;
use crate::score::ScoreTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusRow {
    pub bus: usize,
    pub vm: f64,
    /// Degrees.
    pub va: f64,
    pub p_injection_mw: f64,
    pub q_injection_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub branch: usize,
    pub from: usize,
    pub to: usize,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    /// Larger end apparent power over rating, percent; absent when unrated.
    pub loading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRow {
    pub generator: usize,
    pub bus: usize,
    pub p_mw: f64,
    pub q_mvar: f64,
    pub vm: f64,
    /// Degrees.
    pub va: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub converged: bool,
    pub iterations: usize,
    pub buses: Vec<BusRow>,
    pub branches: Vec<BranchRow>,
    pub generators: Vec<GenRow>,
}

fn loading(net: &Network, state: &SystemState, l: usize) -> Option<f64> {
    let br = &net.branches[l];
    br.has_flow_limit().then(|| state.branch_flows[l].max_apparent() / br.s_max * 100.0)
}

impl StateReport {
    pub fn new(net: &Network, state: &SystemState) -> Self {
        let base = net.base_mva;
        StateReport {
            converged: state.converged,
            iterations: state.iterations,
            buses: (0..net.n_buses())
                .map(|k| BusRow {
                    bus: net.bus_number(k),
                    vm: state.vm(k),
                    va: state.va(k).to_degrees(),
                    p_injection_mw: state.injections[k].re * base,
                    q_injection_mvar: state.injections[k].im * base,
                })
                .collect(),
            branches: net
                .active_branches()
                .map(|(l, br)| {
                    let f = state.branch_flows[l];
                    BranchRow {
                        branch: l,
                        from: net.bus_number(br.from_bus),
                        to: net.bus_number(br.to_bus),
                        p_from_mw: f.from.re * base,
                        q_from_mvar: f.from.im * base,
                        p_to_mw: f.to.re * base,
                        q_to_mvar: f.to.im * base,
                        loading: loading(net, state, l),
                    }
                })
                .collect(),
            generators: net
                .active_generators()
                .map(|(i, g)| GenRow {
                    generator: i,
                    bus: net.bus_number(g.bus),
                    p_mw: state.generation[i].re * base,
                    q_mvar: state.generation[i].im * base,
                    vm: state.vm(g.bus),
                    va: state.va(g.bus).to_degrees(),
                })
                .collect(),
        }
    }
}

/// Generator dispatch with total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchReport {
    pub converged: bool,
    pub iterations: usize,
    pub total_cost: f64,
    pub generators: Vec<GenRow>,
}

impl DispatchReport {
    pub fn new(net: &Network, sol: &OpfSolution) -> Self {
        DispatchReport {
            converged: sol.converged(),
            iterations: sol.iterations,
            total_cost: sol.cost,
            generators: net
                .active_generators()
                .map(|(i, g)| GenRow {
                    generator: i,
                    bus: net.bus_number(g.bus),
                    p_mw: sol.pg[i],
                    q_mvar: sol.qg[i],
                    vm: sol.vm[g.bus],
                    va: sol.va[g.bus].to_degrees(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub bus: usize,
    /// In the order of `ScoreReport::criteria`.
    pub factors: Vec<f64>,
    pub cq: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub criteria: Vec<String>,
    pub lambda: f64,
    pub rho: f64,
    pub rows: Vec<ScoreRow>,
}

impl ScoreReport {
    pub fn new(table: &ScoreTable, rho: f64) -> Self {
        ScoreReport {
            criteria: table.criteria.iter().map(|c| c.name().to_string()).collect(),
            lambda: table.lambda,
            rho,
            rows: (0..table.cq.len())
                .map(|k| ScoreRow {
                    bus: table.buses[k],
                    factors: table.values[k].clone(),
                    cq: table.cq[k],
                    flagged: table.cq[k] >= rho,
                })
                .collect(),
        }
    }

    /// External numbers of flagged buses.
    pub fn flagged(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.flagged).map(|r| r.bus).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDelta {
    pub branch: usize,
    pub from: usize,
    pub to: usize,
    pub p_before_mw: f64,
    pub p_after_mw: f64,
    pub loading_before: Option<f64>,
    pub loading_after: Option<f64>,
    /// Loading change in percentage points.
    pub loading_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageDelta {
    pub bus: usize,
    pub vm_before: f64,
    pub vm_after: f64,
}

/// Per-branch flow and per-bus voltage changes between two states.
pub fn flow_deltas(net: &Network, before: &SystemState, after: &SystemState) -> Vec<FlowDelta> {
    net.active_branches()
        .map(|(l, br)| {
            let (lb, la) = (loading(net, before, l), loading(net, after, l));
            FlowDelta {
                branch: l,
                from: net.bus_number(br.from_bus),
                to: net.bus_number(br.to_bus),
                p_before_mw: before.branch_flows[l].from.re * net.base_mva,
                p_after_mw: after.branch_flows[l].from.re * net.base_mva,
                loading_before: lb,
                loading_after: la,
                loading_delta: lb.zip(la).map(|(b, a)| a - b),
            }
        })
        .collect()
}

pub fn voltage_deltas(net: &Network, before: &SystemState, after: &SystemState) -> Vec<VoltageDelta> {
    (0..net.n_buses())
        .map(|k| VoltageDelta {
            bus: net.bus_number(k),
            vm_before: before.vm(k),
            vm_after: after.vm(k),
        })
        .collect()
}

/// Gate decision summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub generator: usize,
    pub bus: usize,
    pub cq: f64,
    pub gated: bool,
    pub exempt: bool,
    pub alpha: f64,
    pub p_max_before_mw: f64,
    pub p_max_after_mw: f64,
}

/// Both dispatches, both score tables and the changes between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub traditional: DispatchReport,
    pub cyber: DispatchReport,
    pub cost_increase: f64,
    pub gate: Vec<GateRow>,
    pub scores_before: ScoreReport,
    pub scores_after: ScoreReport,
    pub flows: Vec<FlowDelta>,
    pub voltages: Vec<VoltageDelta>,
}

impl CompareReport {
    pub fn new(net: &Network, r: &CyberOpfResult, rho: f64) -> Self {
        let base = net.base_mva;
        CompareReport {
            traditional: DispatchReport::new(net, &r.traditional),
            cyber: DispatchReport::new(net, &r.cyber),
            cost_increase: r.cost_of_security(),
            gate: r
                .decisions
                .iter()
                .map(|d| GateRow {
                    generator: d.generator,
                    bus: d.bus,
                    cq: d.cq,
                    gated: d.gated,
                    exempt: d.exempt,
                    alpha: d.alpha,
                    p_max_before_mw: d.before.p_max * base,
                    p_max_after_mw: d.after.p_max * base,
                })
                .collect(),
            scores_before: ScoreReport::new(&r.before, rho),
            scores_after: ScoreReport::new(&r.after, rho),
            flows: flow_deltas(net, &r.traditional_state, &r.cyber_state),
            voltages: voltage_deltas(net, &r.traditional_state, &r.cyber_state),
        }
    }

    /// The delta row for the branch joining two external bus numbers.
    pub fn flow_between(&self, a: usize, b: usize) -> Option<&FlowDelta> {
        self.flows.iter().find(|f| (f.from, f.to) == (a, b) || (f.from, f.to) == (b, a))
    }
}
