//! Per-bus CPES-QSM score: selected factors aggregated by a Choquet
//! integral over a λ-fuzzy measure.

use serde::{Deserialize, Serialize};

use crate::cyber::{compute_cyber, CyberFactors, CyberScenario, RiskModel};
use crate::electrical::{compute_crpi, compute_svsi, compute_vcpi, compute_vdi, CrpiOptions};
use crate::error::{Error, Result};
use crate::graph::{compute_graph_factors, CyberGraph, GraphFactors};
use crate::grid::{build_ybus, Network};
use crate::mcdm::FuzzyMeasure;
use crate::powerflow::SystemState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "CRPI")]
    Crpi,
    #[serde(rename = "VDI")]
    Vdi,
    #[serde(rename = "VCPI")]
    Vcpi,
    #[serde(rename = "SVSI")]
    Svsi,
    #[serde(rename = "BC")]
    Bc,
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "EBC")]
    Ebc,
    /// Single-device risk; attack graphs are ignored.
    #[serde(rename = "QCR-B")]
    QcrB,
    /// Attack-graph risk where a graph is given.
    #[serde(rename = "QCR-A")]
    QcrA,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Crpi => "CRPI",
            Criterion::Vdi => "VDI",
            Criterion::Vcpi => "VCPI",
            Criterion::Svsi => "SVSI",
            Criterion::Bc => "BC",
            Criterion::Cc => "CC",
            Criterion::Ebc => "EBC",
            Criterion::QcrB => "QCR-B",
            Criterion::QcrA => "QCR-A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedCriterion {
    pub name: Criterion,
    pub weight: f64,
}

/// Criteria with their singleton weights, plus factor options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub criteria: Vec<WeightedCriterion>,
    #[serde(default)]
    pub crpi: CrpiOptions,
}

impl ScoreConfig {
    pub fn new(criteria: &[(Criterion, f64)]) -> Self {
        ScoreConfig {
            criteria: criteria
                .iter()
                .map(|&(name, weight)| WeightedCriterion { name, weight })
                .collect(),
            crpi: CrpiOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ScoreConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::Validation("no criteria selected".into()));
        }
        for (i, c) in self.criteria.iter().enumerate() {
            if self.criteria[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Validation(format!("criterion {} listed twice", c.name.name())));
            }
        }
        self.measure().map(|_| ())
    }

    pub fn names(&self) -> Vec<Criterion> {
        self.criteria.iter().map(|c| c.name).collect()
    }

    pub fn measure(&self) -> Result<FuzzyMeasure> {
        FuzzyMeasure::new(&self.criteria.iter().map(|c| c.weight).collect::<Vec<_>>())
    }
}

/// Per-bus factor values and scores for one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub criteria: Vec<Criterion>,
    pub lambda: f64,
    /// External bus numbers, one per row.
    pub buses: Vec<usize>,
    /// `values[k][j]`: criterion `j` at bus row `k`.
    pub values: Vec<Vec<f64>>,
    pub cq: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyber: Option<CyberFactors>,
}

impl ScoreTable {
    pub fn value(&self, bus: usize, c: Criterion) -> Option<f64> {
        let j = self.criteria.iter().position(|&x| x == c)?;
        Some(self.values[bus][j])
    }

    /// All values of criterion `c`, by bus row.
    pub fn column(&self, c: Criterion) -> Option<Vec<f64>> {
        let j = self.criteria.iter().position(|&x| x == c)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    /// Dense ids of buses scoring at or above `rho`.
    pub fn flagged(&self, rho: f64) -> Vec<usize> {
        (0..self.cq.len()).filter(|&k| self.cq[k] >= rho).collect()
    }
}

fn column(
    c: Criterion,
    net: &Network,
    state: &SystemState,
    scenario: &CyberScenario,
    config: &ScoreConfig,
    graph: &mut Option<GraphFactors>,
    cyber: &mut Option<CyberFactors>,
    crpi: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut graph_factors = || -> GraphFactors {
        graph
            .get_or_insert_with(|| compute_graph_factors(&CyberGraph::from_network(net)))
            .clone()
    };
    Ok(match c {
        Criterion::Crpi => match crpi {
            Some(v) if v.len() == net.n_buses() => v.to_vec(),
            Some(v) => {
                return Err(Error::Dimension {
                    expected: net.n_buses(),
                    got: v.len(),
                })
            }
            None => compute_crpi(net, state, &config.crpi)?.crpi,
        },
        Criterion::Vdi => compute_vdi(state),
        Criterion::Vcpi => compute_vcpi(state, &build_ybus(net))?,
        Criterion::Svsi => compute_svsi(state, &build_ybus(net), net)?,
        Criterion::Bc => graph_factors().bc,
        Criterion::Cc => graph_factors().cc,
        Criterion::Ebc => graph_factors().ebc,
        Criterion::QcrB | Criterion::QcrA => {
            let model = if c == Criterion::QcrA { RiskModel::Graph } else { RiskModel::Single };
            let g = graph_factors();
            let f = compute_cyber(net, state, &g, scenario, model)?;
            let qcr = f.qcr.clone();
            *cyber = Some(f);
            qcr
        }
    })
}

/// Scores every bus of `net` at operating point `state`.
pub fn cpes_qsm(
    net: &Network,
    state: &SystemState,
    scenario: &CyberScenario,
    config: &ScoreConfig,
) -> Result<ScoreTable> {
    cpes_qsm_with_crpi(net, state, scenario, config, None)
}

/// As [`cpes_qsm`], taking the CRPI column from `crpi` instead of
/// re-running contingency screening when it is given.
pub fn cpes_qsm_with_crpi(
    net: &Network,
    state: &SystemState,
    scenario: &CyberScenario,
    config: &ScoreConfig,
    crpi: Option<&[f64]>,
) -> Result<ScoreTable> {
    config.validate()?;
    let measure = config.measure()?;
    let criteria = config.names();
    let mut graph = None;
    let mut cyber = None;
    let columns = criteria
        .iter()
        .map(|&c| column(c, net, state, scenario, config, &mut graph, &mut cyber, crpi))
        .collect::<Result<Vec<_>>>()?;
    let n = net.n_buses();
    let mut values = Vec::with_capacity(n);
    let mut cq = Vec::with_capacity(n);
    for k in 0..n {
        let row: Vec<f64> = columns.iter().map(|col| col[k]).collect();
        if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("{} = {v}", criteria[j].name())).at_bus(net.bus_number(k)));
        }
        cq.push(measure.choquet(&row).map_err(|e| e.at_bus(net.bus_number(k)))?);
        values.push(row);
    }
    Ok(ScoreTable {
        criteria,
        lambda: measure.lambda(),
        buses: net.buses.iter().map(|b| b.number).collect(),
        values,
        cq,
        cyber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyber::{AttackComplexity, AttackVector, CvssVector, PrivilegesRequired, UserInteraction};
    use crate::grid::testnets::*;
    use crate::powerflow::{solve_acpf, Dispatch};

    fn scenario() -> CyberScenario {
        CyberScenario::uniform(CvssVector::new(
            AttackVector::Network,
            AttackComplexity::Low,
            UserInteraction::None,
            PrivilegesRequired::None,
        ))
    }

    fn state(net: &Network) -> SystemState {
        solve_acpf(net, &build_ybus(net), &Dispatch::from_network(net), &Default::default()).unwrap()
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"criteria": [{"name": "CRPI", "weight": 0.26}, {"name": "QCR-B", "weight": 0.55}],
                       "crpi": {"n_pi": 4, "islanding": "drop_island"}}"#;
        let c = ScoreConfig::from_json(text).unwrap();
        assert_eq!(c.names(), vec![Criterion::Crpi, Criterion::QcrB]);
        assert_eq!(c.crpi.n_pi, 4);
        assert!(!c.crpi.include_transformers);
        assert_eq!(ScoreConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn config_rejects_duplicates_and_bad_weights() {
        let dup = ScoreConfig::new(&[(Criterion::Vdi, 0.3), (Criterion::Vdi, 0.4)]);
        assert!(dup.validate().is_err());
        assert!(ScoreConfig::new(&[(Criterion::Vdi, 1.3)]).validate().is_err());
        assert!(ScoreConfig::new(&[]).validate().is_err());
    }

    #[test]
    fn single_criterion_score_is_that_factor() {
        let net = triangle(0.3);
        let s = state(&net);
        let t = cpes_qsm(&net, &s, &scenario(), &ScoreConfig::new(&[(Criterion::Vdi, 0.5)])).unwrap();
        let vdi = compute_vdi(&s);
        for k in 0..3 {
            assert!((t.cq[k] - vdi[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_factors_zero_score() {
        // unloaded network: no flow, flat voltages, zero demand share for loads
        let net = two_bus(num_complex::Complex64::new(0.0, 0.0));
        let s = state(&net);
        let cfg = ScoreConfig::new(&[(Criterion::Vdi, 0.4), (Criterion::Vcpi, 0.4), (Criterion::Svsi, 0.4)]);
        let t = cpes_qsm(&net, &s, &scenario(), &cfg).unwrap();
        assert_eq!(t.cq, vec![0.0, 0.0]);
        assert!(t.flagged(0.2).is_empty());
    }

    #[test]
    fn qcr_columns_and_breakdown() {
        let net = triangle(0.3);
        let s = state(&net);
        let cfg = ScoreConfig::new(&[(Criterion::QcrB, 0.5), (Criterion::Bc, 0.3), (Criterion::Cc, 0.3)]);
        let t = cpes_qsm(&net, &s, &scenario(), &cfg).unwrap();
        let cyber = t.cyber.as_ref().unwrap();
        for k in 0..3 {
            assert_eq!(t.value(k, Criterion::QcrB), Some(cyber.qcr[k]));
            assert_eq!(t.value(k, Criterion::Cc), Some(1.0));
        }
        assert_eq!(t.buses, vec![1, 2, 3]);
        assert!(t.flagged(0.0).len() == 3);
    }

    #[test]
    fn supplied_crpi_column_is_used() {
        let net = triangle(0.3);
        let s = state(&net);
        let cfg = ScoreConfig::new(&[(Criterion::Crpi, 0.5), (Criterion::Vdi, 0.4)]);
        let fresh = cpes_qsm(&net, &s, &scenario(), &cfg).unwrap();
        let crpi = fresh.column(Criterion::Crpi).unwrap();
        let held = cpes_qsm_with_crpi(&net, &s, &scenario(), &cfg, Some(&crpi)).unwrap();
        assert_eq!(held, fresh);
        let fixed = cpes_qsm_with_crpi(&net, &s, &scenario(), &cfg, Some(&[0.7; 3])).unwrap();
        assert_eq!(fixed.column(Criterion::Crpi).unwrap(), vec![0.7; 3]);
        assert!(cpes_qsm_with_crpi(&net, &s, &scenario(), &cfg, Some(&[0.7; 2])).is_err());
    }
}
