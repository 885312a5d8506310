//! Bundled IEEE RTS-24 case and the matching scoring inputs.

/// MATPOWER case text.
pub const RTS24_CASE: &str = include_str!("../data/case24_ieee_rts.m");
/// [`crate::CyberScenario`] JSON.
pub const RTS24_SCENARIO: &str = include_str!("../data/rts24_scenario.json");
/// [`crate::ScoreConfig`] JSON with the five-factor weight set.
pub const RTS24_SCORE: &str = include_str!("../data/rts24_score.json");
/// [`crate::CyberGate`] JSON.
pub const RTS24_GATE: &str = include_str!("../data/rts24_gate.json");
