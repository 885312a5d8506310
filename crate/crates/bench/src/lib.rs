//! Shared fixtures for the benchmarks.

use cpes_core::data::{RTS24_CASE, RTS24_GATE, RTS24_SCENARIO, RTS24_SCORE};
use cpes_core::opf::snapshot;
use cpes_core::{parse_case, solve_t_acopf, CyberGate, CyberScenario, Network, OpfOptions, ScoreConfig, SystemState};

pub struct Rts24 {
    pub net: Network,
    pub scenario: CyberScenario,
    pub score: ScoreConfig,
    pub gate: CyberGate,
    /// Operating point of the traditional OPF dispatch.
    pub state: SystemState,
}

pub fn rts24() -> Rts24 {
    let net = parse_case(RTS24_CASE).unwrap();
    let t = solve_t_acopf(&net, &OpfOptions::default()).unwrap();
    let state = snapshot(&net, &t).unwrap();
    Rts24 {
        scenario: CyberScenario::from_json(RTS24_SCENARIO).unwrap(),
        score: ScoreConfig::from_json(RTS24_SCORE).unwrap(),
        gate: CyberGate::from_json(RTS24_GATE).unwrap(),
        net,
        state,
    }
}
