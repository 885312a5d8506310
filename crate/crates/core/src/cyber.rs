//! CVSS v3.1 exploitability probabilities, single-device (QCR-B) and
//! attack-graph (QCR-A) cyber risk.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::GraphFactors;
use crate::grid::Network;
use crate::powerflow::SystemState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackVector {
    Network,
    #[serde(alias = "Adjacent")]
    AdjacentNetwork,
    #[serde(alias = "LocalNetwork")]
    Local,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackComplexity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserInteraction {
    None,
    Required,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrivilegesRequired {
    None,
    Low,
    High,
}

/// Exploitability metrics of one vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CvssVector {
    #[serde(rename = "AV")]
    pub attack_vector: AttackVector,
    #[serde(rename = "AC")]
    pub attack_complexity: AttackComplexity,
    #[serde(rename = "UI")]
    pub user_interaction: UserInteraction,
    #[serde(rename = "PR")]
    pub privileges_required: PrivilegesRequired,
    #[serde(default, rename = "scope_changed")]
    pub scope_changed: bool,
}

impl AttackVector {
    pub fn value(self) -> f64 {
        match self {
            AttackVector::Network => 0.85,
            AttackVector::AdjacentNetwork => 0.62,
            AttackVector::Local => 0.55,
            AttackVector::Physical => 0.2,
        }
    }
}

impl AttackComplexity {
    pub fn value(self) -> f64 {
        match self {
            AttackComplexity::Low => 0.77,
            AttackComplexity::High => 0.44,
        }
    }
}

impl UserInteraction {
    pub fn value(self) -> f64 {
        match self {
            UserInteraction::None => 0.85,
            UserInteraction::Required => 0.62,
        }
    }
}

impl PrivilegesRequired {
    pub fn value(self, scope_changed: bool) -> f64 {
        match (self, scope_changed) {
            (PrivilegesRequired::None, _) => 0.85,
            (PrivilegesRequired::Low, false) => 0.62,
            (PrivilegesRequired::Low, true) => 0.68,
            (PrivilegesRequired::High, false) => 0.27,
            (PrivilegesRequired::High, true) => 0.50,
        }
    }
}

impl CvssVector {
    pub const fn new(
        attack_vector: AttackVector,
        attack_complexity: AttackComplexity,
        user_interaction: UserInteraction,
        privileges_required: PrivilegesRequired,
    ) -> Self {
        CvssVector {
            attack_vector,
            attack_complexity,
            user_interaction,
            privileges_required,
            scope_changed: false,
        }
    }
}

/// `AV * AC * UI * PR`.
pub fn exploit_probability(v: &CvssVector) -> f64 {
    v.attack_vector.value()
        * v.attack_complexity.value()
        * v.user_interaction.value()
        * v.privileges_required.value(v.scope_changed)
}

/// A device is exploited if any one of its vulnerabilities is.
fn any_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    let probs: Vec<f64> = probs.into_iter().collect();
    match probs.as_slice() {
        [p] => *p,
        _ => 1.0 - probs.iter().map(|p| 1.0 - p).product::<f64>(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: String,
    pub vulnerabilities: Vec<CvssVector>,
}

impl Device {
    pub fn new(id: impl Into<String>, v: CvssVector) -> Self {
        Device {
            id: id.into(),
            vulnerabilities: vec![v],
        }
    }

    pub fn probability(&self) -> Result<f64> {
        if self.vulnerabilities.is_empty() {
            return Err(Error::Scenario(format!("device {} has no vulnerabilities", self.id)));
        }
        Ok(any_of(self.vulnerabilities.iter().map(exploit_probability)))
    }
}

/// One hop of an attack path: a single device, or several any of which
/// gives the attacker the next foothold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stage {
    Serial(Device),
    Parallel(Vec<Device>),
}

impl Stage {
    pub fn probability(&self) -> Result<f64> {
        match self {
            Stage::Serial(d) => d.probability(),
            Stage::Parallel(_) => Ok(any_of(stage_layer(self)?)),
        }
    }
}

fn stage_layer(stage: &Stage) -> Result<Vec<f64>> {
    match stage {
        Stage::Serial(d) => Ok(vec![d.probability()?]),
        Stage::Parallel(ds) if ds.is_empty() => Err(Error::Scenario("empty parallel stage".into())),
        Stage::Parallel(ds) => ds.iter().map(Device::probability).collect(),
    }
}

/// Ordered attack stages; the last stage is the target device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttackGraph {
    pub stages: Vec<Stage>,
}

impl AttackGraph {
    /// Probability that every leading stage is breached, then the target.
    pub fn probability(&self) -> Result<f64> {
        let (target, leading) = self
            .stages
            .split_last()
            .ok_or_else(|| Error::Scenario("attack graph has no stages".into()))?;
        let target = match target {
            Stage::Serial(d) => d.probability()?,
            Stage::Parallel(_) => {
                return Err(Error::Scenario("attack graph must end in a single target device".into()))
            }
        };
        let lead = leading.iter().map(stage_layer).collect::<Result<Vec<_>>>()?;
        Ok(compose(&lead, target))
    }
}

/// Attack-path probability from per-stage device probabilities: a stage
/// with one entry is a serial hop, several entries form a parallel layer.
pub fn compose(leading: &[Vec<f64>], target: f64) -> f64 {
    leading.iter().map(|layer| any_of(layer.iter().copied())).product::<f64>() * target
}

/// Impact term `(BC + CC + EBC) * power_share`.
pub fn impact(g: &GraphFactors, bus: usize, power_share: f64) -> f64 {
    g.centrality_sum(bus) * power_share
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusRisk {
    pub probability: f64,
    pub impact: f64,
    pub qcr: f64,
}

pub fn qcr_b(v: &CvssVector, g: &GraphFactors, bus: usize, power_share: f64) -> BusRisk {
    let probability = exploit_probability(v);
    let impact = impact(g, bus, power_share);
    BusRisk {
        probability,
        impact,
        qcr: probability * impact,
    }
}

pub fn qcr_a(graph: &AttackGraph, g: &GraphFactors, bus: usize, power_share: f64) -> Result<BusRisk> {
    let probability = graph.probability()?;
    let impact = impact(g, bus, power_share);
    Ok(BusRisk {
        probability,
        impact,
        qcr: probability * impact,
    })
}

/// How a bus's share of system power is taken when it both generates and consumes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareRule {
    /// Buses hosting an in-service generator use their generation share,
    /// all others their demand share.
    #[default]
    GenerationFirst,
    /// The larger of the generation and demand shares.
    Larger,
}

/// Per-bus share of total generation or of total demand.
pub fn power_shares(net: &Network, state: &SystemState, rule: ShareRule) -> Vec<f64> {
    let n = net.n_buses();
    let mut gen = vec![0.0; n];
    let mut hosts = vec![false; n];
    for (i, g) in net.active_generators() {
        gen[g.bus] += state.generation[i].re;
        hosts[g.bus] = true;
    }
    let load: Vec<f64> = net.bus_demand().iter().map(|s| s.re).collect();
    let share = |v: &[f64]| -> Vec<f64> {
        let total: f64 = v.iter().map(|x| x.max(0.0)).sum();
        v.iter()
            .map(|x| if total > 0.0 { x.max(0.0) / total } else { 0.0 })
            .collect()
    };
    let (gs, ls) = (share(&gen), share(&load));
    (0..n)
        .map(|k| match rule {
            ShareRule::GenerationFirst if hosts[k] => gs[k],
            ShareRule::GenerationFirst => ls[k],
            ShareRule::Larger => gs[k].max(ls[k]),
        })
        .collect()
}

/// Cyber exposure of one bus, keyed by external bus number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusExposure {
    pub bus: usize,
    #[serde(default)]
    pub devices: Vec<Device>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_graph: Option<AttackGraph>,
}

/// CVSS v3.1 exploitability sub-score coefficient.
pub const EXPLOITABILITY_COEFFICIENT: f64 = 8.22;

/// Likelihood term used in the risk product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exploitability {
    /// The plain metric product, a probability.
    #[default]
    Probability,
    /// The CVSS exploitability sub-score, `8.22 * probability`.
    Subscore,
}

impl Exploitability {
    pub fn scale(self) -> f64 {
        match self {
            Exploitability::Probability => 1.0,
            Exploitability::Subscore => EXPLOITABILITY_COEFFICIENT,
        }
    }
}

/// Cyber scenario: a default vulnerability profile plus per-bus overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyberScenario {
    pub default: CvssVector,
    #[serde(default)]
    pub buses: Vec<BusExposure>,
    #[serde(default)]
    pub exploitability: Exploitability,
    #[serde(default)]
    pub share: ShareRule,
}

/// Which risk formula a bus was scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskModel {
    Single,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyberFactors {
    pub probability: Vec<f64>,
    /// Likelihood actually multiplied into the risk.
    pub exploitability: Vec<f64>,
    pub impact: Vec<f64>,
    pub qcr: Vec<f64>,
    pub model: Vec<RiskModel>,
}

impl CyberScenario {
    pub fn uniform(v: CvssVector) -> Self {
        CyberScenario {
            default: v,
            buses: Vec::new(),
            exploitability: Exploitability::Probability,
            share: ShareRule::GenerationFirst,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks bus references against `net` and probabilities for validity.
    pub fn validate(&self, net: &Network) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.buses {
            if net.bus_id(e.bus).is_none() {
                return Err(Error::Scenario(format!("bus {} is not in the network", e.bus)));
            }
            if !seen.insert(e.bus) {
                return Err(Error::Scenario(format!("bus {} listed twice", e.bus)));
            }
            if e.devices.is_empty() && e.attack_graph.is_none() {
                return Err(Error::Scenario(format!("bus {} has neither devices nor attack graph", e.bus)));
            }
            self.exposure_probability(e, RiskModel::Graph)?;
            self.exposure_probability(e, RiskModel::Single)?;
        }
        Ok(())
    }

    /// Graph model: the attack graph when given, else the bus devices.
    /// Single model: the bus devices, else the attack graph's target.
    fn exposure_probability(&self, e: &BusExposure, model: RiskModel) -> Result<(f64, RiskModel)> {
        let devices = |ds: &[Device]| -> Result<f64> {
            Ok(any_of(ds.iter().map(Device::probability).collect::<Result<Vec<_>>>()?))
        };
        match (&e.attack_graph, model) {
            (Some(g), RiskModel::Graph) => Ok((g.probability()?, RiskModel::Graph)),
            (Some(g), RiskModel::Single) if e.devices.is_empty() => match g.stages.last() {
                Some(Stage::Serial(d)) => Ok((d.probability()?, RiskModel::Single)),
                _ => Err(Error::Scenario(format!("bus {} attack graph has no target device", e.bus))),
            },
            _ => Ok((devices(&e.devices)?, RiskModel::Single)),
        }
    }

    /// Exploitation probability and the model used, for every bus (dense ids).
    pub fn probabilities(&self, net: &Network, model: RiskModel) -> Result<Vec<(f64, RiskModel)>> {
        self.validate(net)?;
        let mut out = vec![(exploit_probability(&self.default), RiskModel::Single); net.n_buses()];
        for e in &self.buses {
            out[net.bus_id(e.bus).expect("validated")] = self.exposure_probability(e, model)?;
        }
        Ok(out)
    }
}

/// QCR for every bus under `scenario` at operating point `state`.
pub fn compute_cyber(
    net: &Network,
    state: &SystemState,
    g: &GraphFactors,
    scenario: &CyberScenario,
    model: RiskModel,
) -> Result<CyberFactors> {
    let probs = scenario.probabilities(net, model)?;
    let shares = power_shares(net, state, scenario.share);
    let scale = scenario.exploitability.scale();
    let mut out = CyberFactors {
        probability: Vec::with_capacity(probs.len()),
        exploitability: Vec::with_capacity(probs.len()),
        impact: Vec::with_capacity(probs.len()),
        qcr: Vec::with_capacity(probs.len()),
        model: Vec::with_capacity(probs.len()),
    };
    for (k, (p, model)) in probs.into_iter().enumerate() {
        let i = impact(g, k, shares[k]);
        out.probability.push(p);
        out.exploitability.push(p * scale);
        out.impact.push(i);
        out.qcr.push(p * scale * i);
        out.model.push(model);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AttackComplexity as AC;
    use AttackVector as AV;
    use PrivilegesRequired as PR;
    use UserInteraction as UI;

    const OPEN: CvssVector = CvssVector::new(AV::Network, AC::Low, UI::None, PR::None);
    const SECURE: CvssVector = CvssVector::new(AV::Local, AC::High, UI::Required, PR::High);

    fn factors() -> GraphFactors {
        GraphFactors {
            bc: vec![0.2, 0.0],
            cc: vec![0.5, 0.3],
            ebc: vec![0.1, 0.05],
        }
    }

    fn device(p: CvssVector) -> Device {
        Device::new("d", p)
    }

    #[test]
    fn probability_products() {
        assert!((exploit_probability(&OPEN) - 0.85 * 0.77 * 0.85 * 0.85).abs() < 1e-15);
        let phys = CvssVector::new(AV::Physical, AC::High, UI::Required, PR::High);
        assert!((exploit_probability(&phys) - 0.0147312).abs() < 1e-12);
        assert!(exploit_probability(&OPEN) > exploit_probability(&SECURE));
    }

    #[test]
    fn scope_changes_privilege_value() {
        let mut v = CvssVector::new(AV::Network, AC::Low, UI::None, PR::Low);
        let unchanged = exploit_probability(&v);
        v.scope_changed = true;
        assert!((exploit_probability(&v) / unchanged - 0.68 / 0.62).abs() < 1e-12);
    }

    #[test]
    fn zero_share_zero_risk() {
        assert_eq!(qcr_b(&OPEN, &factors(), 0, 0.0).qcr, 0.0);
    }

    #[test]
    fn qcr_b_is_probability_times_impact() {
        let r = qcr_b(&OPEN, &factors(), 0, 0.1);
        assert!((r.impact - 0.08).abs() < 1e-15);
        assert!((r.qcr - exploit_probability(&OPEN) * 0.08).abs() < 1e-15);
    }

    #[test]
    fn single_device_graph_equals_qcr_b() {
        let g = AttackGraph { stages: vec![Stage::Serial(device(OPEN))] };
        let a = qcr_a(&g, &factors(), 1, 0.3).unwrap();
        let b = qcr_b(&OPEN, &factors(), 1, 0.3);
        assert_eq!(a, b);
    }

    #[test]
    fn composition_rules() {
        assert_eq!(compose(&[vec![0.5]], 0.5), 0.25);
        // two parallel leaders at 0.5: three of four joint outcomes breach the layer
        let outcomes = [(true, true), (true, false), (false, true), (false, false)];
        let lead: f64 = outcomes.iter().filter(|(a, b)| *a || *b).map(|_| 0.25).sum();
        assert_eq!(lead, 0.75);
        assert_eq!(compose(&[vec![0.5, 0.5]], 0.5), lead * 0.5);
        assert_eq!(compose(&[vec![0.5, 0.5]], 0.5), 0.375);
        assert_eq!(compose(&[], 0.3), 0.3);
    }

    #[test]
    fn serial_chain_shrinks_parallel_layer_grows() {
        let d = device(OPEN);
        let p = d.probability().unwrap();
        let chain = |k: usize| AttackGraph { stages: vec![Stage::Serial(d.clone()); k] }.probability().unwrap();
        assert!((chain(2) - p * p).abs() < 1e-15);
        assert!(chain(3) <= chain(2));
        let layer = |w: usize| Stage::Parallel(vec![d.clone(); w]).probability().unwrap();
        assert!(layer(3) >= layer(2));
        assert!((layer(2) - (1.0 - (1.0 - p).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn graph_errors() {
        assert!(AttackGraph { stages: vec![] }.probability().is_err());
        let g = AttackGraph { stages: vec![Stage::Parallel(vec![device(OPEN)])] };
        assert!(g.probability().is_err());
    }

    #[test]
    fn scenario_json_round_trip() {
        let text = r#"{
            "default": {"AV": "Local", "AC": "High", "UI": "Required", "PR": "High"},
            "buses": [
                {"bus": 2, "devices": [{"id": "rtu", "vulnerabilities": [{"AV": "Network", "AC": "Low", "UI": "None", "PR": "None"}]}]},
                {"bus": 3, "attack_graph": [
                    [{"id": "a", "vulnerabilities": [{"AV": "Network", "AC": "Low", "UI": "None", "PR": "None"}]},
                     {"id": "b", "vulnerabilities": [{"AV": "Adjacent", "AC": "Low", "UI": "None", "PR": "Low"}]}],
                    {"id": "t", "vulnerabilities": [{"AV": "Local", "AC": "Low", "UI": "None", "PR": "None"}]}
                ]}
            ]
        }"#;
        let s = CyberScenario::from_json(text).unwrap();
        assert_eq!(s.default, SECURE);
        assert!(matches!(s.buses[1].attack_graph.as_ref().unwrap().stages[0], Stage::Parallel(_)));
        assert_eq!(CyberScenario::from_json(&s.to_json().unwrap()).unwrap(), s);
        let net = crate::grid::testnets::triangle(0.1);
        let probs = s.probabilities(&net, RiskModel::Graph).unwrap();
        assert_eq!(probs[0], (exploit_probability(&SECURE), RiskModel::Single));
        assert_eq!(probs[1].0, exploit_probability(&OPEN));
        assert_eq!(probs[2].1, RiskModel::Graph);
        let single = s.probabilities(&net, RiskModel::Single).unwrap();
        let target = CvssVector::new(AV::Local, AC::Low, UI::None, PR::None);
        assert_eq!(single[2], (exploit_probability(&target), RiskModel::Single));
    }

    #[test]
    fn share_rules_for_dual_role_bus() {
        // bus 0 generates everything; bus 1 hosts a small unit and most demand
        let mut net = crate::grid::testnets::triangle(0.3);
        net.buses[1].kind = crate::grid::BusKind::Pv;
        net.generators.push(crate::grid::testnets::gen(1, 1.0));
        net.generators[1].p_set = 0.1;
        let state = crate::powerflow::solve_acpf(
            &net,
            &crate::grid::build_ybus(&net),
            &crate::powerflow::Dispatch::from_network(&net),
            &Default::default(),
        )
        .unwrap();
        let total = state.generation[0].re + state.generation[1].re;
        let hosted = power_shares(&net, &state, ShareRule::GenerationFirst);
        assert!((hosted[1] - 0.1 / total).abs() < 1e-12);
        assert!((hosted[2] - 0.5).abs() < 1e-12);
        let larger = power_shares(&net, &state, ShareRule::Larger);
        assert!((larger[1] - 0.5).abs() < 1e-12);
        assert!((larger[0] - hosted[0]).abs() < 1e-15);
    }

    #[test]
    fn subscore_scales_risk() {
        let net = crate::grid::testnets::triangle(0.3);
        let state = crate::powerflow::solve_acpf(
            &net,
            &crate::grid::build_ybus(&net),
            &crate::powerflow::Dispatch::from_network(&net),
            &Default::default(),
        )
        .unwrap();
        let g = GraphFactors { bc: vec![0.0; 3], cc: vec![1.0; 3], ebc: vec![1.0 / 3.0; 3] };
        let mut s = CyberScenario::uniform(OPEN);
        let plain = compute_cyber(&net, &state, &g, &s, RiskModel::Graph).unwrap();
        s.exploitability = Exploitability::Subscore;
        let scaled = compute_cyber(&net, &state, &g, &s, RiskModel::Graph).unwrap();
        assert!((exploit_probability(&OPEN) * 8.22 - 3.887).abs() < 1e-3);
        for k in 0..3 {
            assert_eq!(scaled.probability[k], plain.probability[k]);
            assert!((scaled.qcr[k] - 8.22 * plain.qcr[k]).abs() < 1e-15);
        }
        // slack carries all generation; loads split evenly
        assert!((plain.impact[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((plain.impact[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_rejects_unknown_bus() {
        let mut s = CyberScenario::uniform(SECURE);
        s.buses.push(BusExposure { bus: 99, devices: vec![device(OPEN)], attack_graph: None });
        assert!(matches!(s.validate(&crate::grid::testnets::triangle(0.1)), Err(Error::Scenario(_))));
    }
}
