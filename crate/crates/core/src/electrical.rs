//! Electrical-domain factors: contingency ranking (CRPI), voltage deviation
//! (VDI), voltage collapse proximity (VCPI) and simplified voltage stability
//! (SVSI).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AdmittanceMatrix, Network};
use crate::powerflow::{solve_fdpf_1p1q, solve_fdpf_1p1q_main_island, SystemState};

/// Default overload exponent parameter.
pub const DEFAULT_N_PI: u32 = 2;

/// How an outage that disconnects buses from the slack is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IslandingPolicy {
    /// Assign the largest finite index found among the other outages.
    MaxFinite,
    /// De-energize the cut-off buses and score the surviving network.
    DropIsland,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrpiOptions {
    pub n_pi: u32,
    /// Screen transformer outages and count transformer loading too.
    pub include_transformers: bool,
    pub islanding: IslandingPolicy,
}

impl Default for CrpiOptions {
    fn default() -> Self {
        CrpiOptions {
            n_pi: DEFAULT_N_PI,
            include_transformers: false,
            islanding: IslandingPolicy::MaxFinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricalFactors {
    pub crpi: Vec<f64>,
    pub vdi: Vec<f64>,
    pub vcpi: Vec<f64>,
    pub svsi: Vec<f64>,
}

/// Performance index of one single-branch outage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageIndex {
    pub branch: usize,
    /// Unscaled index; for islanding outages this is the assigned severity.
    pub pi: f64,
    pub islanding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyRanking {
    /// Sorted by descending PI, then ascending branch id.
    pub ranking: Vec<OutageIndex>,
    /// Per-bus CRPI scaled to [0, 1].
    pub crpi: Vec<f64>,
}

/// Sum of `(P_l / P_l^max)^(2 n_pi)` over limited, in-service branches other
/// than `outage`, using from-end active power.
pub fn performance_index(net: &Network, state: &SystemState, outage: usize, opts: &CrpiOptions) -> f64 {
    let exp = 2 * opts.n_pi as i32;
    net.active_branches()
        .filter(|&(l, br)| {
            l != outage && br.has_flow_limit() && (opts.include_transformers || !br.is_transformer())
        })
        .map(|(l, br)| (state.branch_flows[l].from.re / br.s_max).powi(exp))
        .sum()
}

/// Ranks single-branch outages with the 1P1Q fast-decoupled screen and
/// assigns each bus the largest index among its screened branches.
///
/// With [`IslandingPolicy::MaxFinite`], an outage that islands part of the
/// network gets the largest finite index found (1.0 if none is finite).
pub fn compute_crpi(net: &Network, base: &SystemState, opts: &CrpiOptions) -> Result<ContingencyRanking> {
    if opts.n_pi < 1 {
        return Err(Error::Domain("n_pi must be at least 1".into()));
    }
    let outages: Vec<usize> = net
        .active_branches()
        .filter(|(_, br)| opts.include_transformers || !br.is_transformer())
        .map(|(i, _)| i)
        .collect();
    let results: Vec<Result<Option<f64>>> = outages
        .par_iter()
        .map(|&i| {
            let post = match opts.islanding {
                IslandingPolicy::MaxFinite => solve_fdpf_1p1q(net, Some(i), base),
                IslandingPolicy::DropIsland => solve_fdpf_1p1q_main_island(net, Some(i), base).map(|r| r.0),
            };
            match post {
                Ok(post) => Ok(Some(performance_index(net, &post, i, opts))),
                Err(Error::Islanding { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut raw = Vec::with_capacity(outages.len());
    for (i, r) in outages.iter().zip(results) {
        raw.push((*i, r?));
    }
    let max_finite = raw.iter().filter_map(|(_, p)| *p).fold(None, |m: Option<f64>, p| {
        Some(m.map_or(p, |m| m.max(p)))
    });
    let island_pi = max_finite.unwrap_or(1.0);
    let mut ranking: Vec<OutageIndex> = raw
        .into_iter()
        .map(|(branch, pi)| OutageIndex {
            branch,
            pi: pi.unwrap_or(island_pi),
            islanding: pi.is_none(),
        })
        .collect();
    ranking.sort_by(|a, b| b.pi.total_cmp(&a.pi).then(a.branch.cmp(&b.branch)));

    let mut per_bus = vec![0.0_f64; net.n_buses()];
    for o in &ranking {
        let br = &net.branches[o.branch];
        per_bus[br.from_bus] = per_bus[br.from_bus].max(o.pi);
        per_bus[br.to_bus] = per_bus[br.to_bus].max(o.pi);
    }
    let top = ranking.first().map_or(0.0, |o| o.pi);
    let crpi = if top > 0.0 {
        per_bus.iter().map(|p| p / top).collect()
    } else {
        vec![0.0; net.n_buses()]
    };
    Ok(ContingencyRanking { ranking, crpi })
}

/// Deviation of each bus voltage magnitude from 1.0 pu.
pub fn compute_vdi(state: &SystemState) -> Vec<f64> {
    state.voltages.iter().map(|v| (1.0 - v.norm()).abs()).collect()
}

/// Voltage collapse proximity from admittance-weighted neighbour voltages.
///
/// The weights use the off-diagonal entries of each Ybus row, so a flat
/// voltage profile gives exactly zero.
pub fn compute_vcpi(state: &SystemState, ybus: &AdmittanceMatrix) -> Result<Vec<f64>> {
    let v = &state.voltages;
    (0..ybus.dim())
        .map(|k| {
            let off: Vec<(usize, Complex64)> =
                ybus.row(k).iter().copied().filter(|&(m, _)| m != k).collect();
            let denom: Complex64 = off.iter().map(|&(_, y)| y).sum();
            if denom.norm() == 0.0 {
                return Err(Error::UndefinedFactor {
                    factor: "VCPI",
                    bus: k,
                    reason: "bus has no neighbours".into(),
                });
            }
            let weighted: Complex64 = off.iter().map(|&(m, y)| y / denom * v[m]).sum();
            Ok((Complex64::new(1.0, 0.0) - weighted / v[k]).norm())
        })
        .collect()
}

/// Relative electrical distance between load and generator buses.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub load_buses: Vec<usize>,
    pub gen_buses: Vec<usize>,
    /// `red[(i, j)]` for load bus `load_buses[i]` and generator bus `gen_buses[j]`.
    pub red: DMatrix<f64>,
    /// Nearest generator bus for each load bus.
    pub nearest: Vec<usize>,
}

impl DistanceTable {
    pub fn nearest_to(&self, load_bus: usize) -> Option<usize> {
        self.load_buses
            .iter()
            .position(|&b| b == load_bus)
            .map(|i| self.nearest[i])
    }
}

/// `F = -inv(Y_LL) Y_LG`, `RED = 1 - |F|`; nearest generator minimises RED.
pub fn relative_electrical_distance(
    ybus: &AdmittanceMatrix,
    gen_buses: &[usize],
    load_buses: &[usize],
) -> Result<DistanceTable> {
    let y = ybus.to_dense();
    let yll = DMatrix::from_fn(load_buses.len(), load_buses.len(), |r, c| y[(load_buses[r], load_buses[c])]);
    let ylg = DMatrix::from_fn(load_buses.len(), gen_buses.len(), |r, c| y[(load_buses[r], gen_buses[c])]);
    let f = if load_buses.is_empty() {
        DMatrix::<Complex64>::zeros(0, gen_buses.len())
    } else {
        -yll
            .lu()
            .solve(&ylg)
            .ok_or_else(|| Error::Numeric("load-bus admittance block is singular".into()))?
    };
    let red = f.map(|z| 1.0 - z.norm());
    let nearest = (0..load_buses.len())
        .map(|r| {
            let (j, _) = red
                .row(r)
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |(bj, bv), (j, &v)| if v < bv { (j, v) } else { (bj, bv) });
            gen_buses[j]
        })
        .collect();
    Ok(DistanceTable {
        load_buses: load_buses.to_vec(),
        gen_buses: gen_buses.to_vec(),
        red,
        nearest,
    })
}

/// Simplified voltage stability index; zero at generator buses.
pub fn compute_svsi(state: &SystemState, ybus: &AdmittanceMatrix, net: &Network) -> Result<Vec<f64>> {
    let gens = net.generator_buses();
    if gens.is_empty() {
        return Err(Error::UndefinedFactor {
            factor: "SVSI",
            bus: 0,
            reason: "network has no generator bus".into(),
        });
    }
    let loads: Vec<usize> = (0..net.n_buses()).filter(|b| gens.binary_search(b).is_err()).collect();
    let table = relative_electrical_distance(ybus, &gens, &loads)?;
    let mags: Vec<f64> = state.voltages.iter().map(|v| v.norm()).collect();
    let spread = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let beta = 1.0 - spread * spread;
    if beta <= 0.0 {
        return Err(Error::UndefinedFactor {
            factor: "SVSI",
            bus: 0,
            reason: format!("voltage spread {spread:.3} pu leaves no stability margin"),
        });
    }
    let mut svsi = vec![0.0; net.n_buses()];
    for (i, &k) in table.load_buses.iter().enumerate() {
        let g = table.nearest[i];
        let dv = (state.voltages[g] - state.voltages[k]).norm();
        svsi[k] = dv / (beta * mags[k]);
    }
    Ok(svsi)
}

/// All four electrical factors for one operating point.
pub fn compute_electrical(
    net: &Network,
    ybus: &AdmittanceMatrix,
    state: &SystemState,
    crpi: &CrpiOptions,
) -> Result<ElectricalFactors> {
    Ok(ElectricalFactors {
        crpi: compute_crpi(net, state, crpi)?.crpi,
        vdi: compute_vdi(state),
        vcpi: compute_vcpi(state, ybus)?,
        svsi: compute_svsi(state, ybus, net)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_ybus, testnets::*, BusKind, Load};
    use crate::powerflow::{solve_acpf, Dispatch, NewtonOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn solved(net: &Network) -> SystemState {
        solve_acpf(net, &build_ybus(net), &Dispatch::from_network(net), &NewtonOptions::default()).unwrap()
    }

    fn opts(n_pi: u32) -> CrpiOptions {
        CrpiOptions { n_pi, ..Default::default() }
    }

    fn with_voltages(net: &Network, v: Vec<Complex64>) -> SystemState {
        let mut s = solved(net);
        s.voltages = v;
        s
    }

    #[test]
    fn vdi_values() {
        let net = two_bus(c(0.0, 0.0));
        let s = with_voltages(&net, vec![c(1.0, 0.0), Complex64::from_polar(1.05, 0.3)]);
        let vdi = compute_vdi(&s);
        assert_eq!(vdi[0], 0.0);
        assert!((vdi[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn vcpi_zero_on_flat_profile() {
        let net = triangle(0.1);
        let y = build_ybus(&net);
        let common = Complex64::from_polar(0.97, -0.4);
        let s = with_voltages(&net, vec![common; 3]);
        for v in compute_vcpi(&s, &y).unwrap() {
            assert!(v < 1e-14);
        }
        let two = two_bus(c(0.0, 0.0));
        let s = with_voltages(&two, vec![c(1.0, 0.0); 2]);
        assert_eq!(compute_vcpi(&s, &build_ybus(&two)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn vcpi_isolated_bus_is_error() {
        let mut net = triangle(0.1);
        let s = with_voltages(&net, vec![c(1.0, 0.0); 3]);
        for b in &mut net.branches {
            if b.touches(2) {
                b.in_service = false;
            }
        }
        let y = build_ybus(&net);
        assert!(matches!(compute_vcpi(&s, &y), Err(Error::UndefinedFactor { bus: 2, .. })));
    }

    #[test]
    fn svsi_two_bus_hand_evaluation() {
        let net = two_bus(c(0.5, 0.1));
        let vg = c(1.0, 0.0);
        let vk = Complex64::from_polar(0.95, (-5.0f64).to_radians());
        let s = with_voltages(&net, vec![vg, vk]);
        let svsi = compute_svsi(&s, &build_ybus(&net), &net).unwrap();
        let beta = 1.0 - 0.05f64.powi(2);
        assert!((beta - 0.9975).abs() < 1e-15);
        let expected = (vg - vk).norm() / (beta * 0.95);
        assert_eq!(svsi[0], 0.0);
        assert!((svsi[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn svsi_zero_on_identical_phasors() {
        let net = triangle(0.2);
        let s = with_voltages(&net, vec![Complex64::from_polar(1.01, 0.2); 3]);
        assert!(compute_svsi(&s, &build_ybus(&net), &net).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn red_two_bus_reduction() {
        let net = two_bus(c(0.0, 0.0));
        let t = relative_electrical_distance(&build_ybus(&net), &[0], &[1]).unwrap();
        assert!(t.red[(0, 0)].abs() < 1e-12);
        assert_eq!(t.nearest, vec![0]);
    }

    #[test]
    fn red_prefers_adjacent_generator() {
        // chain gA(0) - 1 - 2 - 3 - gB(4); load bus 1 is adjacent to A, three hops from B
        let mut net = network(
            &[BusKind::Pq, BusKind::Pq, BusKind::Pq, BusKind::Pv],
            vec![
                line(0, 1, 0.01, 0.1, 0.0),
                line(1, 2, 0.01, 0.1, 0.0),
                line(2, 3, 0.01, 0.1, 0.0),
                line(3, 4, 0.01, 0.1, 0.0),
            ],
        );
        net.buses[2].shunt_admittance = c(0.0, 0.01);
        net.generators.push(gen(4, 1.0));
        let y = build_ybus(&net);
        let t = relative_electrical_distance(&y, &[0, 4], &[1, 2, 3]).unwrap();
        assert_eq!(t.nearest_to(1), Some(0));
        assert_eq!(t.nearest_to(3), Some(4));
        // oracle: explicit inverse
        let yd = y.to_dense();
        let ll = [1, 2, 3];
        let yll = DMatrix::from_fn(3, 3, |r, c| yd[(ll[r], ll[c])]);
        let inv = yll.try_inverse().unwrap();
        let ylg = DMatrix::from_fn(3, 2, |r, c| yd[(ll[r], [0, 4][c])]);
        let f = -(inv * ylg);
        for r in 0..3 {
            for g in 0..2 {
                assert!((t.red[(r, g)] - (1.0 - f[(r, g)].norm())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crpi_small_when_flows_below_limits() {
        let mut net = triangle(0.05);
        for b in &mut net.branches {
            b.s_max = 5.0;
        }
        let base = solved(&net);
        let r = compute_crpi(&net, &base, &opts(8)).unwrap();
        for o in &r.ranking {
            assert!(o.pi < 1e-20, "pi {}", o.pi);
        }
    }

    #[test]
    fn crpi_two_bus_islanding_sentinel() {
        let net = two_bus(c(0.3, 0.1));
        let base = solved(&net);
        let r = compute_crpi(&net, &base, &opts(2)).unwrap();
        assert!(r.ranking[0].islanding);
        assert_eq!(r.crpi, vec![1.0, 1.0]);
    }

    #[test]
    fn drop_island_scores_surviving_network() {
        // triangle plus a radial bus 3 hanging off bus 2
        let mut net = triangle(0.5);
        net.buses.push(net.buses[2].clone());
        net.buses[3].id = 3;
        net.buses[3].number = 4;
        net.branches.push(line(2, 3, 0.01, 0.1, 0.0));
        net.loads.push(Load { bus: 3, demand: c(0.2, 0.0) });
        let base = solved(&net);
        let spur = compute_crpi(&net, &base, &opts(2)).unwrap();
        assert!(spur.ranking.iter().find(|o| o.branch == 3).unwrap().islanding);
        assert_eq!(spur.crpi[3], 1.0);
        let o = CrpiOptions { islanding: IslandingPolicy::DropIsland, ..opts(2) };
        let dropped = compute_crpi(&net, &base, &o).unwrap();
        let entry = dropped.ranking.iter().find(|o| o.branch == 3).unwrap();
        assert!(!entry.islanding);
        // losing the spur load lightens every remaining line
        let intact: f64 = performance_index(&net, &base, 3, &o);
        assert!(entry.pi < intact);
        assert!(dropped.crpi[3] < 1.0);
    }

    #[test]
    fn transformers_screened_only_on_request() {
        let mut net = triangle(0.5);
        net.branches[1].tap = 1.02;
        let base = solved(&net);
        let lines = compute_crpi(&net, &base, &opts(2)).unwrap();
        assert!(lines.ranking.iter().all(|o| o.branch != 1));
        let all = CrpiOptions { include_transformers: true, ..opts(2) };
        assert_eq!(compute_crpi(&net, &base, &all).unwrap().ranking.len(), 3);
    }

    #[test]
    fn crpi_scaled_and_ranked() {
        let mut net = triangle(0.8);
        net.loads[0].demand = c(1.2, 0.2);
        net.loads.push(Load { bus: 2, demand: c(0.1, 0.0) });
        let base = solved(&net);
        let r = compute_crpi(&net, &base, &opts(2)).unwrap();
        assert!(r.crpi.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(r.crpi.contains(&1.0));
        assert!(r.ranking.windows(2).all(|w| w[0].pi >= w[1].pi));
    }

    #[test]
    fn doubling_limits_decreases_every_index() {
        let mut net = triangle(0.8);
        net.loads[0].demand = c(1.2, 0.2);
        let base = solved(&net);
        let mut doubled = net.clone();
        for b in &mut doubled.branches {
            b.s_max *= 2.0;
        }
        for i in 0..3 {
            let a = performance_index(&net, &base, i, &opts(2));
            let b = performance_index(&doubled, &base, i, &opts(2));
            assert!(b < a || a == 0.0);
        }
        let r1 = compute_crpi(&net, &base, &opts(2)).unwrap();
        let r2 = compute_crpi(&doubled, &base, &opts(2)).unwrap();
        let top = |r: &ContingencyRanking| -> Vec<usize> {
            (0..3).filter(|&b| r.crpi[b] == 1.0).collect()
        };
        assert_eq!(top(&r1), top(&r2));
    }
}
