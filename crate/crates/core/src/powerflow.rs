//! AC power flow: full Newton-Raphson and the single-sweep fast-decoupled
//! (1P1Q) approximation used for contingency screening.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::derivatives::dsbus_dv;
use crate::error::{Error, Result};
use crate::grid::{build_ybus, AdmittanceMatrix, BranchAdmittance, BusKind, Network};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 30;

/// Complex power leaving each end of a branch, pu.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BranchFlow {
    pub from: Complex64,
    pub to: Complex64,
}

impl BranchFlow {
    pub fn losses(&self) -> Complex64 {
        self.from + self.to
    }

    /// Larger apparent power of the two ends.
    pub fn max_apparent(&self) -> f64 {
        self.from.norm().max(self.to.norm())
    }
}

/// Generator setpoints: active output and voltage magnitude per generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    /// Active output, pu, indexed like `Network::generators`.
    pub p: Vec<f64>,
    /// Voltage setpoint, pu.
    pub v: Vec<f64>,
}

impl Dispatch {
    /// The schedule stored in the case file.
    pub fn from_network(net: &Network) -> Self {
        Dispatch {
            p: net.generators.iter().map(|g| g.p_set).collect(),
            v: net.generators.iter().map(|g| g.v_set).collect(),
        }
    }
}

/// A solved (or approximated) operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub voltages: Vec<Complex64>,
    /// Indexed like `Network::branches`; zero for out-of-service branches.
    pub branch_flows: Vec<BranchFlow>,
    /// Net complex injection at each bus, pu.
    pub injections: Vec<Complex64>,
    /// Complex output of each generator, pu (zero when out of service).
    pub generation: Vec<Complex64>,
    /// Bus roles actually used by the solver (after any PV to PQ switching).
    pub kinds: Vec<BusKind>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl SystemState {
    pub fn vm(&self, bus: usize) -> f64 {
        self.voltages[bus].norm()
    }

    pub fn va(&self, bus: usize) -> f64 {
        self.voltages[bus].arg()
    }

    pub fn total_generation(&self) -> Complex64 {
        self.generation.iter().sum()
    }

    pub fn total_losses(&self) -> Complex64 {
        self.branch_flows.iter().map(BranchFlow::losses).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    pub enforce_q_limits: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            enforce_q_limits: true,
        }
    }
}

fn to_vec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

fn mismatch_vec(ybus: &AdmittanceMatrix, v: &[Complex64], sbus: &[Complex64]) -> Vec<Complex64> {
    let i = ybus.mul_vec(v);
    v.iter()
        .zip(i.iter())
        .zip(sbus.iter())
        .map(|((vk, ik), s)| vk * ik.conj() - s)
        .collect()
}

/// Largest power mismatch over the equations the bus roles impose.
pub fn max_mismatch(
    ybus: &AdmittanceMatrix,
    v: &[Complex64],
    sbus: &[Complex64],
    kinds: &[BusKind],
) -> f64 {
    mismatch_vec(ybus, v, sbus)
        .iter()
        .zip(kinds)
        .map(|(m, k)| match k {
            BusKind::Slack => 0.0,
            BusKind::Pv => m.re.abs(),
            BusKind::Pq => m.re.abs().max(m.im.abs()),
        })
        .fold(0.0, f64::max)
}

/// Computes flows, injections and generator outputs for fixed voltages.
pub(crate) fn complete_state(
    net: &Network,
    ybus: &AdmittanceMatrix,
    voltages: Vec<Complex64>,
    dispatch_p: &[f64],
    kinds: Vec<BusKind>,
    fixed_q: &[Option<f64>],
) -> SystemState {
    let injections: Vec<Complex64> = {
        let i = ybus.mul_vec(&voltages);
        voltages.iter().zip(&i).map(|(v, i)| v * i.conj()).collect()
    };
    let branch_flows = net
        .branches
        .iter()
        .map(|br| {
            if !br.in_service {
                return BranchFlow::default();
            }
            let (from, to) = BranchAdmittance::of(br).flows(voltages[br.from_bus], voltages[br.to_bus]);
            BranchFlow { from, to }
        })
        .collect();
    let demand = net.bus_demand();
    let slack = net.slack();
    let mut generation = vec![Complex64::new(0.0, 0.0); net.generators.len()];
    for b in 0..net.n_buses() {
        let gens: Vec<usize> = net
            .active_generators()
            .filter(|(_, g)| g.bus == b)
            .map(|(i, _)| i)
            .collect();
        if gens.is_empty() {
            continue;
        }
        let needed = injections[b] + demand[b];
        // active power: scheduled, except the slack bus takes the balance on its first unit
        let mut p_sched: Vec<f64> = gens.iter().map(|&i| dispatch_p[i]).collect();
        if b == slack {
            let others: f64 = p_sched[1..].iter().sum();
            p_sched[0] = needed.re - others;
        }
        // reactive power: fixed units keep their value, the rest share by range
        let fixed: f64 = gens.iter().filter_map(|&i| fixed_q[i]).sum();
        let free: Vec<usize> = gens.iter().copied().filter(|&i| fixed_q[i].is_none()).collect();
        let q_rest = needed.im - fixed;
        let span: f64 = free
            .iter()
            .map(|&i| net.generators[i].q_max - net.generators[i].q_min)
            .sum();
        for (k, &i) in gens.iter().enumerate() {
            let q = match fixed_q[i] {
                Some(q) => q,
                None if span > 0.0 => {
                    let g = &net.generators[i];
                    q_rest * (g.q_max - g.q_min) / span
                }
                None => q_rest / free.len() as f64,
            };
            generation[i] = Complex64::new(p_sched[k], q);
        }
    }
    let sbus = specified_injections(net, dispatch_p, fixed_q, &generation);
    let max_mismatch = max_mismatch(ybus, &voltages, &sbus, &kinds);
    SystemState {
        voltages,
        branch_flows,
        injections,
        generation,
        kinds,
        converged: false,
        iterations: 0,
        max_mismatch,
    }
}

fn specified_injections(
    net: &Network,
    dispatch_p: &[f64],
    fixed_q: &[Option<f64>],
    generation: &[Complex64],
) -> Vec<Complex64> {
    let mut s: Vec<Complex64> = net.bus_demand().iter().map(|d| -d).collect();
    for (i, g) in net.active_generators() {
        let q = fixed_q[i].unwrap_or(generation[i].im);
        s[g.bus] += Complex64::new(dispatch_p[i], q);
    }
    s
}

fn initial_kinds(net: &Network) -> Vec<BusKind> {
    let gen_buses = net.generator_buses();
    net.buses
        .iter()
        .map(|b| match b.kind {
            BusKind::Pv if gen_buses.binary_search(&b.id).is_err() => BusKind::Pq,
            k => k,
        })
        .collect()
}

struct Indexing {
    pvpq: Vec<usize>,
    pq: Vec<usize>,
}

impl Indexing {
    fn new(kinds: &[BusKind]) -> Self {
        let pvpq = (0..kinds.len()).filter(|&i| kinds[i] != BusKind::Slack).collect();
        let pq = (0..kinds.len()).filter(|&i| kinds[i] == BusKind::Pq).collect();
        Indexing { pvpq, pq }
    }
}

/// Newton-Raphson iterations at fixed bus roles.
fn newton(
    ybus: &AdmittanceMatrix,
    dense: &DMatrix<Complex64>,
    mut v: Vec<Complex64>,
    sbus: &[Complex64],
    kinds: &[BusKind],
    opts: &NewtonOptions,
) -> Result<(Vec<Complex64>, usize, f64)> {
    let idx = Indexing::new(kinds);
    let (npvpq, npq) = (idx.pvpq.len(), idx.pq.len());
    let residual = |v: &[Complex64]| -> DVector<f64> {
        let mis = mismatch_vec(ybus, v, sbus);
        DVector::from_iterator(
            npvpq + npq,
            idx.pvpq.iter().map(|&i| mis[i].re).chain(idx.pq.iter().map(|&i| mis[i].im)),
        )
    };
    let mut f = residual(&v);
    let mut norm = f.amax();
    let mut it = 0;
    while norm > opts.tolerance {
        if it == opts.max_iter {
            return Err(Error::Diverged {
                iterations: it,
                mismatch: norm,
            });
        }
        it += 1;
        let (d_va, d_vm) = dsbus_dv(dense, &to_vec(&v));
        let mut jac = DMatrix::<f64>::zeros(npvpq + npq, npvpq + npq);
        for (r, &i) in idx.pvpq.iter().enumerate() {
            for (c, &k) in idx.pvpq.iter().enumerate() {
                jac[(r, c)] = d_va[(i, k)].re;
            }
            for (c, &k) in idx.pq.iter().enumerate() {
                jac[(r, npvpq + c)] = d_vm[(i, k)].re;
            }
        }
        for (r, &i) in idx.pq.iter().enumerate() {
            for (c, &k) in idx.pvpq.iter().enumerate() {
                jac[(npvpq + r, c)] = d_va[(i, k)].im;
            }
            for (c, &k) in idx.pq.iter().enumerate() {
                jac[(npvpq + r, npvpq + c)] = d_vm[(i, k)].im;
            }
        }
        let dx = jac
            .lu()
            .solve(&(-&f))
            .ok_or_else(|| Error::Numeric("singular power flow Jacobian".into()))?;
        let mut va: Vec<f64> = v.iter().map(|z| z.arg()).collect();
        let mut vm: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        for (c, &k) in idx.pvpq.iter().enumerate() {
            va[k] += dx[c];
        }
        for (c, &k) in idx.pq.iter().enumerate() {
            vm[k] += dx[npvpq + c];
        }
        v = vm.iter().zip(&va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();
        f = residual(&v);
        norm = f.amax();
        if !norm.is_finite() {
            return Err(Error::Diverged {
                iterations: it,
                mismatch: norm,
            });
        }
    }
    Ok((v, it, norm))
}

/// Full Newton-Raphson AC power flow from a flat start.
///
/// Generator buses hold the dispatch voltage setpoints; the slack angle is
/// zero. With `enforce_q_limits`, generators that violate reactive limits are
/// pinned at the limit and their bus is re-solved as PQ.
pub fn solve_acpf(
    net: &Network,
    ybus: &AdmittanceMatrix,
    dispatch: &Dispatch,
    opts: &NewtonOptions,
) -> Result<SystemState> {
    let n = net.n_buses();
    if dispatch.p.len() != net.generators.len() || dispatch.v.len() != net.generators.len() {
        return Err(Error::Dimension {
            expected: net.generators.len(),
            got: dispatch.p.len(),
        });
    }
    let dense = ybus.to_dense();
    let mut kinds = initial_kinds(net);
    let mut vm: Vec<f64> = vec![1.0; n];
    for (i, g) in net.active_generators() {
        if kinds[g.bus] != BusKind::Pq {
            vm[g.bus] = dispatch.v[i];
        }
    }
    let mut v: Vec<Complex64> = vm.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let mut fixed_q: Vec<Option<f64>> = vec![None; net.generators.len()];
    // generators at load buses inject their scheduled Q
    for (i, g) in net.active_generators() {
        if kinds[g.bus] == BusKind::Pq {
            fixed_q[i] = Some(net.generators[i].q_set);
        }
    }
    let mut total_it = 0;
    loop {
        let zero_q = vec![Complex64::new(0.0, 0.0); net.generators.len()];
        let sbus = specified_injections(net, &dispatch.p, &fixed_q, &zero_q);
        let (sol, it, _) = newton(ybus, &dense, v, &sbus, &kinds, opts).map_err(|e| match e {
            Error::Diverged { iterations, mismatch } => Error::Diverged {
                iterations: iterations + total_it,
                mismatch,
            },
            other => other,
        })?;
        total_it += it;
        v = sol;
        let state = complete_state(net, ybus, v.clone(), &dispatch.p, kinds.clone(), &fixed_q);
        if !opts.enforce_q_limits {
            return Ok(finish(state, total_it, opts.tolerance));
        }
        let mut switched = false;
        for (i, g) in net.active_generators() {
            if kinds[g.bus] != BusKind::Pv || fixed_q[i].is_some() {
                continue;
            }
            let q = state.generation[i].im;
            let lim = if q > g.q_max + 1e-9 {
                Some(g.q_max)
            } else if q < g.q_min - 1e-9 {
                Some(g.q_min)
            } else {
                None
            };
            if let Some(l) = lim {
                switched = true;
                kinds[g.bus] = BusKind::Pq;
                for (j, h) in net.active_generators() {
                    if h.bus == g.bus {
                        fixed_q[j] = Some(if j == i { l } else { state.generation[j].im.clamp(h.q_min, h.q_max) });
                    }
                }
            }
        }
        if !switched {
            return Ok(finish(state, total_it, opts.tolerance));
        }
    }
}

fn finish(mut state: SystemState, iterations: usize, tol: f64) -> SystemState {
    state.iterations = iterations;
    state.converged = state.max_mismatch <= tol;
    state
}

/// Fast-decoupled B' (XB scheme): series reactance only.
fn b_prime(net: &Network) -> DMatrix<f64> {
    let n = net.n_buses();
    let mut b = DMatrix::zeros(n, n);
    for (_, br) in net.active_branches() {
        let y = 1.0 / br.x;
        let (f, t) = (br.from_bus, br.to_bus);
        b[(f, f)] += y;
        b[(t, t)] += y;
        b[(f, t)] -= y;
        b[(t, f)] -= y;
    }
    b
}

/// Fast-decoupled B'': full branch model without phase shift.
fn b_double_prime(net: &Network) -> DMatrix<f64> {
    let mut no_shift = net.clone();
    for br in &mut no_shift.branches {
        br.shift = 0.0;
    }
    build_ybus(&no_shift).to_dense().map(|z| -z.im)
}

fn reduce(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

fn outage_network(net: &Network, outage: Option<usize>) -> Result<Network> {
    match outage {
        Some(k) if k >= net.branches.len() => Err(Error::Domain(format!("no branch {k}"))),
        Some(k) => Ok(net.with_branch_out(k)),
        None => Ok(net.clone()),
    }
}

/// One P-θ and one Q-V fast-decoupled half iteration after removing
/// `outage` (or with the topology unchanged when `None`), starting from
/// the converged `base` state of the intact network.
///
/// Fails with [`Error::Islanding`] when the outage disconnects any bus.
pub fn solve_fdpf_1p1q(net: &Network, outage: Option<usize>, base: &SystemState) -> Result<SystemState> {
    let post = outage_network(net, outage)?;
    let energized = post.reachable_from(net.slack());
    if energized.iter().any(|r| !r) {
        return Err(Error::Islanding {
            branch: outage.unwrap_or(usize::MAX),
        });
    }
    fdpf_core(net, &post, base, &energized)
}

/// Like [`solve_fdpf_1p1q`], but buses cut off from the slack are
/// de-energized (zero voltage, generation and demand) and the remaining
/// network is solved. Returns the state and the energized-bus mask.
pub fn solve_fdpf_1p1q_main_island(
    net: &Network,
    outage: Option<usize>,
    base: &SystemState,
) -> Result<(SystemState, Vec<bool>)> {
    let mut post = outage_network(net, outage)?;
    let energized = post.reachable_from(net.slack());
    post.loads.retain(|l| energized[l.bus]);
    for g in &mut post.generators {
        g.in_service &= energized[g.bus];
    }
    let state = fdpf_core(&post, &post, base, &energized)?;
    Ok((state, energized))
}

fn fdpf_core(net: &Network, post: &Network, base: &SystemState, energized: &[bool]) -> Result<SystemState> {
    let ybus = build_ybus(post);
    let kinds = base.kinds.clone();
    let idx = Indexing::new(&kinds);
    let pvpq: Vec<usize> = idx.pvpq.iter().copied().filter(|&i| energized[i]).collect();
    let pq: Vec<usize> = idx.pq.iter().copied().filter(|&i| energized[i]).collect();
    // injections are fixed by generation and demand, so reuse the base ones
    let sbus = &base.injections;
    let mut vm: Vec<f64> = base
        .voltages
        .iter()
        .zip(energized)
        .map(|(z, &on)| if on { z.norm() } else { 0.0 })
        .collect();
    let mut va: Vec<f64> = base.voltages.iter().map(|z| z.arg()).collect();
    let mut v: Vec<Complex64> = vm.iter().zip(&va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();

    let scaled_mismatch = |v: &[Complex64]| -> Vec<Complex64> {
        mismatch_vec(&ybus, v, sbus)
            .into_iter()
            .zip(v)
            .map(|(m, vk)| m / vk.norm())
            .collect()
    };

    if !pvpq.is_empty() {
        let mis = scaled_mismatch(&v);
        let p = DVector::from_iterator(pvpq.len(), pvpq.iter().map(|&i| mis[i].re));
        let dva = reduce(&b_prime(post), &pvpq)
            .lu()
            .solve(&p)
            .ok_or_else(|| Error::Numeric("singular B' matrix".into()))?;
        for (c, &k) in pvpq.iter().enumerate() {
            va[k] -= dva[c];
        }
        v = vm.iter().zip(&va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();
    }
    if !pq.is_empty() {
        let mis = scaled_mismatch(&v);
        let q = DVector::from_iterator(pq.len(), pq.iter().map(|&i| mis[i].im));
        let dvm = reduce(&b_double_prime(post), &pq)
            .lu()
            .solve(&q)
            .ok_or_else(|| Error::Numeric("singular B'' matrix".into()))?;
        for (c, &k) in pq.iter().enumerate() {
            vm[k] -= dvm[c];
        }
        v = vm.iter().zip(&va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();
    }

    let dispatch_p: Vec<f64> = base.generation.iter().map(|g| g.re).collect();
    let fixed_q: Vec<Option<f64>> = net
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| (kinds[g.bus] == BusKind::Pq).then(|| base.generation[i].im))
        .collect();
    let mut state = complete_state(post, &ybus, v, &dispatch_p, kinds, &fixed_q);
    state.iterations = 1;
    state.converged = state.max_mismatch <= DEFAULT_TOLERANCE;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::testnets::*;
    use crate::grid::Load;

    fn solve(net: &Network) -> SystemState {
        let y = build_ybus(net);
        solve_acpf(net, &y, &Dispatch::from_network(net), &NewtonOptions::default()).unwrap()
    }

    #[test]
    fn two_bus_no_load_is_flat() {
        let net = two_bus(Complex64::new(0.0, 0.0));
        let s = solve(&net);
        assert!(s.converged);
        for v in &s.voltages {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(s.branch_flows[0].from.norm() < 1e-12);
    }

    #[test]
    fn balance_and_positive_losses() {
        let net = triangle(0.6);
        let s = solve(&net);
        assert!(s.converged);
        assert!(s.max_mismatch <= 1e-8);
        let losses = s.total_losses();
        let gen = s.total_generation();
        let load = net.total_demand();
        assert!(losses.re >= 0.0);
        assert!((gen.re - load.re - losses.re).abs() < 1e-8);
        for f in &s.branch_flows {
            assert!(f.losses().re >= -1e-12);
        }
        assert_eq!(s.va(net.slack()), 0.0);
    }

    #[test]
    fn pv_bus_holds_setpoint() {
        let mut net = triangle(0.4);
        net.buses[2].kind = BusKind::Pv;
        let mut g = gen(2, 1.0);
        g.p_set = 0.3;
        g.v_set = 1.03;
        net.generators.push(g);
        let s = solve(&net);
        assert!((s.vm(2) - 1.03).abs() < 1e-12);
        assert!((s.generation[1].re - 0.3).abs() < 1e-12);
    }

    #[test]
    fn q_limit_switches_bus_to_pq() {
        let mut net = triangle(0.4);
        net.buses[2].kind = BusKind::Pv;
        let mut g = gen(2, 1.0);
        g.v_set = 1.08;
        g.q_max = 0.05;
        net.generators.push(g);
        let s = solve(&net);
        assert!(s.converged);
        assert_eq!(s.kinds[2], BusKind::Pq);
        assert!((s.generation[1].im - 0.05).abs() < 1e-9);
        assert!(s.vm(2) < 1.08);
    }

    #[test]
    fn diverges_on_impossible_load() {
        let net = two_bus(Complex64::new(50.0, 20.0));
        let y = build_ybus(&net);
        let r = solve_acpf(&net, &y, &Dispatch::from_network(&net), &NewtonOptions::default());
        assert!(matches!(r, Err(Error::Diverged { .. }) | Err(Error::Numeric(_))));
    }

    #[test]
    fn fdpf_without_outage_keeps_base() {
        let net = triangle(0.5);
        let base = solve(&net);
        let s = solve_fdpf_1p1q(&net, None, &base).unwrap();
        for (a, b) in s.voltages.iter().zip(&base.voltages) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn fdpf_unloaded_branch_outage_keeps_base() {
        // buses 1 and 2 carry identical load and see identical paths, so 1-2 is idle
        let net = triangle(0.5);
        let base = solve(&net);
        assert!(base.branch_flows[1].from.norm() < 1e-9);
        let s = solve_fdpf_1p1q(&net, Some(1), &base).unwrap();
        assert!(s.max_mismatch < 1e-6);
        for (a, b) in s.voltages.iter().zip(&base.voltages) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn fdpf_triangle_outage_tracks_full_solve() {
        let mut net = triangle(0.5);
        net.loads[1].demand = Complex64::new(0.2, 0.05);
        let base = solve(&net);
        let approx = solve_fdpf_1p1q(&net, Some(2), &base).unwrap();
        let exact = solve(&net.with_branch_out(2));
        for k in [0, 1] {
            let (a, e) = (approx.branch_flows[k].from.re, exact.branch_flows[k].from.re);
            assert!((a - e).abs() <= 0.1 * e.abs(), "branch {k}: {a} vs {e}");
        }
        // outage of 0-2 routes all of bus 2's load through 0-1 and 1-2
        assert!(approx.branch_flows[0].from.re > base.branch_flows[0].from.re);
    }

    #[test]
    fn fdpf_outage_shifts_flow_to_remaining_path() {
        // dropping 0-2 forces all of bus 2's load through 0-1-2
        let net = triangle(0.5);
        let base = solve(&net);
        let exact = solve(&net.with_branch_out(2));
        let approx = solve_fdpf_1p1q(&net, Some(2), &base).unwrap();
        assert_eq!(approx.branch_flows[2].from, Complex64::new(0.0, 0.0));
        let p01 = approx.branch_flows[0].from.re;
        assert!(p01 > base.branch_flows[0].from.re);
        assert!((p01 - exact.branch_flows[0].from.re).abs() < 0.1 * exact.branch_flows[0].from.re);
        let p12 = approx.branch_flows[1].from.re;
        assert!((p12 - exact.branch_flows[1].from.re).abs() < 0.1 * exact.branch_flows[1].from.re);
    }

    #[test]
    fn fdpf_detects_islanding() {
        let mut net = two_bus(Complex64::new(0.3, 0.1));
        net.loads.push(Load { bus: 1, demand: Complex64::new(0.1, 0.0) });
        let base = solve(&net);
        assert!(matches!(
            solve_fdpf_1p1q(&net, Some(0), &base),
            Err(Error::Islanding { branch: 0 })
        ));
    }
}
