//! AC optimal power flow in polar coordinates, and the cyber-constrained
//! variant that derates generators at high-risk buses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyber::CyberScenario;
use crate::derivatives::{branch_sides, d2asbr_dv2, d2sbus_dv2, dsbr_dv, dsbus_dv, BranchSide};
use crate::error::{Error, Result};
use crate::grid::{build_ybus, BranchAdmittance, Network};
use crate::pips::{pips, Conditions, Constraints, Nlp, PipsOptions, PipsStatus};
use crate::powerflow::{solve_acpf, Dispatch, SystemState};
use crate::score::{cpes_qsm, cpes_qsm_with_crpi, Criterion, ScoreConfig, ScoreTable};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// Operating limits of one generator, pu.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenBounds {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl GenBounds {
    /// Limits from the case data for every generator.
    pub fn from_network(net: &Network) -> Vec<GenBounds> {
        net.generators
            .iter()
            .map(|g| GenBounds {
                p_min: g.p_min,
                p_max: g.p_max,
                q_min: g.q_min,
                q_max: g.q_max,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpfOptions {
    pub enforce_flow_limits: bool,
    /// Branch angle-difference limits; bounds at or beyond ±360° are ignored.
    pub enforce_angle_limits: bool,
    pub pips: PipsOptions,
}

impl Default for OpfOptions {
    fn default() -> Self {
        OpfOptions {
            enforce_flow_limits: true,
            enforce_angle_limits: false,
            // feasibility is measured relative to the slack magnitudes, which
            // reach tens of pu² on rated branches
            pips: PipsOptions {
                feastol: 1e-8,
                ..PipsOptions::default()
            },
        }
    }
}

/// Result of one OPF solve. Generator quantities are indexed like
/// `Network::generators` (zero when out of service).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfSolution {
    /// MW.
    pub pg: Vec<f64>,
    /// MVAr.
    pub qg: Vec<f64>,
    pub vm: Vec<f64>,
    /// rad.
    pub va: Vec<f64>,
    /// $/h.
    pub cost: f64,
    /// Marginal cost of active power at each bus, $/MWh.
    pub lmp: Vec<f64>,
    pub bounds: Vec<GenBounds>,
    pub status: PipsStatus,
    pub iterations: usize,
    pub conditions: Conditions,
}

impl OpfSolution {
    pub fn converged(&self) -> bool {
        self.status == PipsStatus::Converged
    }

    pub fn voltages(&self) -> Vec<Complex64> {
        self.vm.iter().zip(&self.va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect()
    }

    /// Power-flow setpoints reproducing this solution.
    pub fn dispatch(&self, net: &Network) -> Dispatch {
        Dispatch {
            p: self.pg.iter().map(|p| p / net.base_mva).collect(),
            v: net.generators.iter().map(|g| self.vm[g.bus]).collect(),
        }
    }
}

/// Generation cost of `pg` (MW) over in-service generators, $/h.
pub fn total_cost(net: &Network, pg: &[f64]) -> f64 {
    net.active_generators().map(|(i, g)| g.cost.eval(pg[i])).sum()
}

/// A bound on `x[var]`: `sign * x[var] <= rhs`.
#[derive(Debug, Clone, Copy)]
struct LinearRow {
    var: usize,
    sign: f64,
    rhs: f64,
}

struct AngleRow {
    from: usize,
    to: usize,
    sign: f64,
    rhs: f64,
}

struct Acopf<'a> {
    net: &'a Network,
    ybus: CMat,
    gens: Vec<usize>,
    nb: usize,
    limited: Vec<usize>,
    smax2: DVector<f64>,
    from: BranchSide,
    to: BranchSide,
    fixed: Vec<(usize, f64)>,
    bounds: Vec<LinearRow>,
    angles: Vec<AngleRow>,
    demand: Vec<Complex64>,
}

impl<'a> Acopf<'a> {
    fn new(net: &'a Network, gb: &[GenBounds], opts: &OpfOptions) -> Self {
        let nb = net.n_buses();
        let gens: Vec<usize> = net.active_generators().map(|(i, _)| i).collect();
        let limited: Vec<usize> = if opts.enforce_flow_limits {
            net.active_branches().filter(|(_, b)| b.has_flow_limit()).map(|(i, _)| i).collect()
        } else {
            Vec::new()
        };
        let (from, to) = branch_sides(net, &limited);
        let smax2 = DVector::from_iterator(limited.len(), limited.iter().map(|&l| net.branches[l].s_max.powi(2)));

        let mut fixed = vec![(net.slack(), 0.0)];
        let mut bounds = Vec::new();
        let mut bound = |var: usize, lo: f64, hi: f64| {
            if lo == hi {
                fixed.push((var, lo));
                return;
            }
            if hi.is_finite() {
                bounds.push(LinearRow { var, sign: 1.0, rhs: hi });
            }
            if lo.is_finite() {
                bounds.push(LinearRow { var, sign: -1.0, rhs: -lo });
            }
        };
        for (k, b) in net.buses.iter().enumerate() {
            bound(nb + k, b.v_min, b.v_max);
        }
        let ng = gens.len();
        for (c, &i) in gens.iter().enumerate() {
            bound(2 * nb + c, gb[i].p_min, gb[i].p_max);
            bound(2 * nb + ng + c, gb[i].q_min, gb[i].q_max);
        }

        let mut angles = Vec::new();
        if opts.enforce_angle_limits {
            let full = std::f64::consts::TAU - 1e-9;
            for (_, br) in net.active_branches() {
                if br.angle_diff_max < full {
                    angles.push(AngleRow { from: br.from_bus, to: br.to_bus, sign: 1.0, rhs: br.angle_diff_max });
                }
                if br.angle_diff_min > -full {
                    angles.push(AngleRow { from: br.from_bus, to: br.to_bus, sign: -1.0, rhs: -br.angle_diff_min });
                }
            }
        }

        Acopf {
            net,
            ybus: build_ybus(net).to_dense(),
            gens,
            nb,
            limited,
            smax2,
            from,
            to,
            fixed,
            bounds,
            angles,
            demand: net.bus_demand(),
        }
    }

    fn ng(&self) -> usize {
        self.gens.len()
    }

    fn voltages(&self, x: &DVector<f64>) -> CVec {
        CVec::from_iterator(self.nb, (0..self.nb).map(|k| Complex64::from_polar(x[self.nb + k], x[k])))
    }

    fn x0(&self, gb: &[GenBounds]) -> DVector<f64> {
        let (nb, ng) = (self.nb, self.ng());
        let mut x = DVector::zeros(2 * nb + 2 * ng);
        for (k, b) in self.net.buses.iter().enumerate() {
            x[nb + k] = 0.5 * (b.v_min + b.v_max);
        }
        for (c, &i) in self.gens.iter().enumerate() {
            x[2 * nb + c] = 0.5 * (gb[i].p_min + gb[i].p_max);
            x[2 * nb + ng + c] = 0.5 * (gb[i].q_min + gb[i].q_max);
        }
        for &(var, val) in &self.fixed {
            x[var] = val;
        }
        x
    }
}

impl Nlp for Acopf<'_> {
    fn nx(&self) -> usize {
        2 * self.nb + 2 * self.ng()
    }

    fn objective(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let base = self.net.base_mva;
        let mut f = 0.0;
        let mut df = DVector::zeros(self.nx());
        for (c, &i) in self.gens.iter().enumerate() {
            let cost = &self.net.generators[i].cost;
            let p = x[2 * self.nb + c] * base;
            f += cost.eval(p);
            df[2 * self.nb + c] = cost.derivative(p) * base;
        }
        (f, df)
    }

    fn constraints(&self, x: &DVector<f64>) -> Constraints {
        let (nb, ng, nx) = (self.nb, self.ng(), self.nx());
        let v = self.voltages(x);

        // power balance: S(V) + Sd - Cg Sg = 0, then fixed variables
        let s = v.component_mul(&(&self.ybus * &v).map(|z| z.conj()));
        let neq = 2 * nb + self.fixed.len();
        let mut g = DVector::zeros(neq);
        let mut dg = DMatrix::zeros(neq, nx);
        for k in 0..nb {
            g[k] = s[k].re + self.demand[k].re;
            g[nb + k] = s[k].im + self.demand[k].im;
        }
        for (c, &i) in self.gens.iter().enumerate() {
            let b = self.net.generators[i].bus;
            g[b] -= x[2 * nb + c];
            g[nb + b] -= x[2 * nb + ng + c];
            dg[(b, 2 * nb + c)] = -1.0;
            dg[(nb + b, 2 * nb + ng + c)] = -1.0;
        }
        let (d_va, d_vm) = dsbus_dv(&self.ybus, &v);
        for r in 0..nb {
            for k in 0..nb {
                dg[(r, k)] = d_va[(r, k)].re;
                dg[(r, nb + k)] = d_vm[(r, k)].re;
                dg[(nb + r, k)] = d_va[(r, k)].im;
                dg[(nb + r, nb + k)] = d_vm[(r, k)].im;
            }
        }
        for (r, &(var, val)) in self.fixed.iter().enumerate() {
            g[2 * nb + r] = x[var] - val;
            dg[(2 * nb + r, var)] = 1.0;
        }

        // |S|² flow limits at both ends, angle-difference rows, variable bounds
        let nl = self.limited.len();
        let niq = 2 * nl + self.angles.len() + self.bounds.len();
        let mut h = DVector::zeros(niq);
        let mut dh = DMatrix::zeros(niq, nx);
        for (side, off) in [(&self.from, 0), (&self.to, nl)] {
            let sbr = side.flows(&v);
            let (sa, sm) = dsbr_dv(side, &v);
            for l in 0..nl {
                h[off + l] = sbr[l].norm_sqr() - self.smax2[l];
                for k in 0..nb {
                    dh[(off + l, k)] = 2.0 * (sbr[l].conj() * sa[(l, k)]).re;
                    dh[(off + l, nb + k)] = 2.0 * (sbr[l].conj() * sm[(l, k)]).re;
                }
            }
        }
        for (r, a) in self.angles.iter().enumerate() {
            h[2 * nl + r] = a.sign * (x[a.from] - x[a.to]) - a.rhs;
            dh[(2 * nl + r, a.from)] = a.sign;
            dh[(2 * nl + r, a.to)] = -a.sign;
        }
        let off = 2 * nl + self.angles.len();
        for (r, b) in self.bounds.iter().enumerate() {
            h[off + r] = b.sign * x[b.var] - b.rhs;
            dh[(off + r, b.var)] = b.sign;
        }
        Constraints { g, dg, h, dh }
    }

    fn hessian(&self, x: &DVector<f64>, lam: &DVector<f64>, mu: &DVector<f64>, cost_mult: f64) -> DMatrix<f64> {
        let (nb, nx) = (self.nb, self.nx());
        let base = self.net.base_mva;
        let v = self.voltages(x);
        let mut hess = DMatrix::zeros(nx, nx);
        for (c, &i) in self.gens.iter().enumerate() {
            let j = 2 * nb + c;
            hess[(j, j)] = cost_mult * 2.0 * self.net.generators[i].cost.c2 * base * base;
        }

        let lp = lam.rows(0, nb).map(|l| Complex64::new(l, 0.0));
        let lq = lam.rows(nb, nb).map(|l| Complex64::new(l, 0.0));
        let hp = d2sbus_dv2(&self.ybus, &v, &lp);
        let hq = d2sbus_dv2(&self.ybus, &v, &lq);
        let mut add = |aa: &DMatrix<f64>, av: &DMatrix<f64>, va: &DMatrix<f64>, vv: &DMatrix<f64>| {
            for r in 0..nb {
                for k in 0..nb {
                    hess[(r, k)] += aa[(r, k)];
                    hess[(r, nb + k)] += av[(r, k)];
                    hess[(nb + r, k)] += va[(r, k)];
                    hess[(nb + r, nb + k)] += vv[(r, k)];
                }
            }
        };
        let re = |m: &CMat| m.map(|z| z.re);
        let im = |m: &CMat| m.map(|z| z.im);
        add(
            &(re(&hp.aa) + im(&hq.aa)),
            &(re(&hp.av) + im(&hq.av)),
            &(re(&hp.va) + im(&hq.va)),
            &(re(&hp.vv) + im(&hq.vv)),
        );

        let nl = self.limited.len();
        for (side, off) in [(&self.from, 0), (&self.to, nl)] {
            if nl == 0 {
                break;
            }
            let sbr = side.flows(&v);
            let (sa, sm) = dsbr_dv(side, &v);
            let m = mu.rows(off, nl).into_owned();
            let hf = d2asbr_dv2(side, &v, &sa, &sm, &sbr, &m);
            add(&hf.aa, &hf.av, &hf.va, &hf.vv);
        }
        hess
    }
}

fn bounds_check(net: &Network, bounds: &[GenBounds]) -> Result<()> {
    if bounds.len() != net.generators.len() {
        return Err(Error::Dimension {
            expected: net.generators.len(),
            got: bounds.len(),
        });
    }
    for (i, b) in bounds.iter().enumerate() {
        if !(b.p_min <= b.p_max && b.q_min <= b.q_max) {
            return Err(Error::Infeasible(format!("generator {i} has crossed limits")));
        }
    }
    let p_cap: f64 = net.active_generators().map(|(i, _)| bounds[i].p_max).sum();
    let demand = net.total_demand().re;
    if p_cap < demand {
        return Err(Error::Infeasible(format!(
            "generation capacity {:.2} MW is below demand {:.2} MW",
            p_cap * net.base_mva,
            demand * net.base_mva
        )));
    }
    Ok(())
}

/// Minimum-cost AC dispatch under the given generator limits.
pub fn solve_opf(net: &Network, bounds: &[GenBounds], opts: &OpfOptions) -> Result<OpfSolution> {
    net.validate()?;
    bounds_check(net, bounds)?;
    let nlp = Acopf::new(net, bounds, opts);
    let r = pips(&nlp, nlp.x0(bounds), &opts.pips);
    let (nb, ng) = (nlp.nb, nlp.ng());
    let base = net.base_mva;
    let mut pg = vec![0.0; net.generators.len()];
    let mut qg = vec![0.0; net.generators.len()];
    for (c, &i) in nlp.gens.iter().enumerate() {
        pg[i] = r.x[2 * nb + c] * base;
        qg[i] = r.x[2 * nb + ng + c] * base;
    }
    let sol = OpfSolution {
        cost: total_cost(net, &pg),
        pg,
        qg,
        vm: r.x.rows(nb, nb).iter().copied().collect(),
        va: r.x.rows(0, nb).iter().copied().collect(),
        lmp: r.lam.rows(0, nb).iter().map(|l| l / base).collect(),
        bounds: bounds.to_vec(),
        status: r.status,
        iterations: r.iterations,
        conditions: r.conditions,
    };
    if !sol.converged() {
        let report = check_solution(net, &sol, opts.enforce_flow_limits);
        return Err(Error::OpfDiverged {
            iterations: r.iterations,
            detail: format!(
                "{:?}; worst violation {} = {:.3e}; cost {:.2}",
                r.status, report.worst, report.max_violation, sol.cost
            ),
        });
    }
    Ok(sol)
}

/// Traditional ACOPF with the case-data generator limits.
pub fn solve_t_acopf(net: &Network, opts: &OpfOptions) -> Result<OpfSolution> {
    solve_opf(net, &GenBounds::from_network(net), opts)
}

/// Largest constraint violations of an OPF result, evaluated branch by branch
/// without the optimizer's matrices. Quantities are MW, MVAr, MVA and pu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub p_balance: f64,
    pub q_balance: f64,
    pub voltage: f64,
    pub gen_p: f64,
    pub gen_q: f64,
    pub flow: f64,
    /// Name of the worst constraint.
    pub worst: String,
    pub max_violation: f64,
}

/// Re-evaluates balance, voltage, generator and flow limits at `sol`.
pub fn check_solution(net: &Network, sol: &OpfSolution, flow_limits: bool) -> ConstraintReport {
    let base = net.base_mva;
    let v = sol.voltages();
    let mut inj: Vec<Complex64> = (0..net.n_buses())
        .map(|k| v[k] * (net.buses[k].shunt_admittance * v[k]).conj())
        .collect();
    let mut flow: f64 = 0.0;
    let mut worst = (String::from("none"), 0.0_f64);
    let note = |name: String, val: f64, w: &mut (String, f64)| {
        if val > w.1 {
            *w = (name, val);
        }
    };
    for (l, br) in net.active_branches() {
        let (sf, st) = BranchAdmittance::of(br).flows(v[br.from_bus], v[br.to_bus]);
        inj[br.from_bus] += sf;
        inj[br.to_bus] += st;
        if flow_limits && br.has_flow_limit() {
            let over = (sf.norm().max(st.norm()) - br.s_max) * base;
            flow = flow.max(over);
            note(format!("branch {l} rating"), over, &mut worst);
        }
    }
    let demand = net.bus_demand();
    for (i, g) in net.active_generators() {
        inj[g.bus] -= Complex64::new(sol.pg[i], sol.qg[i]) / base;
    }
    let (mut pb, mut qb, mut vv, mut gp, mut gq) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..net.n_buses() {
        let m = (inj[k] + demand[k]) * base;
        pb = pb.max(m.re.abs());
        qb = qb.max(m.im.abs());
        note(format!("bus {} P balance", net.bus_number(k)), m.re.abs(), &mut worst);
        note(format!("bus {} Q balance", net.bus_number(k)), m.im.abs(), &mut worst);
        let b = &net.buses[k];
        let over = (sol.vm[k] - b.v_max).max(b.v_min - sol.vm[k]);
        vv = vv.max(over);
        note(format!("bus {} voltage", b.number), over, &mut worst);
    }
    for (i, _) in net.active_generators() {
        let lim = &sol.bounds[i];
        let op = (sol.pg[i] - lim.p_max * base).max(lim.p_min * base - sol.pg[i]);
        let oq = (sol.qg[i] - lim.q_max * base).max(lim.q_min * base - sol.qg[i]);
        gp = gp.max(op);
        gq = gq.max(oq);
        note(format!("generator {i} P limit"), op, &mut worst);
        note(format!("generator {i} Q limit"), oq, &mut worst);
    }
    ConstraintReport {
        p_balance: pb,
        q_balance: qb,
        voltage: vv,
        gen_p: gp,
        gen_q: gq,
        flow,
        worst: worst.0,
        max_violation: worst.1,
    }
}

/// Upper-limit scaling applied to a gated generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaPolicy {
    /// Cap output at the technical minimum: `alpha = p_min / p_max`.
    #[default]
    Minimum,
    Fixed(f64),
}

/// Per-generator gate settings, keyed by external bus number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateRule {
    pub bus: usize,
    /// Shut the unit down entirely when gated.
    #[serde(default)]
    pub zeta: bool,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Never gate this unit.
    #[serde(default)]
    pub exempt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyberGate {
    pub rho: f64,
    #[serde(default)]
    pub alpha_policy: AlphaPolicy,
    /// Scale the reactive upper limit by the same factor as active power.
    #[serde(default = "yes")]
    pub scale_reactive: bool,
    #[serde(default)]
    pub generators: Vec<GateRule>,
    /// Re-run contingency screening when scoring the re-dispatched state;
    /// otherwise the pre-gate CRPI column is kept.
    #[serde(default)]
    pub refresh_crpi: bool,
}

fn yes() -> bool {
    true
}

impl CyberGate {
    pub fn new(rho: f64) -> Self {
        CyberGate {
            rho,
            alpha_policy: AlphaPolicy::Minimum,
            scale_reactive: true,
            generators: Vec::new(),
            refresh_crpi: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: CyberGate = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::Validation(format!("threshold {} must be non-negative", self.rho)));
        }
        let bad = |a: f64| !(a.is_finite() && (0.0..=1.0).contains(&a));
        if let AlphaPolicy::Fixed(a) = self.alpha_policy {
            if bad(a) {
                return Err(Error::Validation(format!("alpha {a} is outside [0, 1]")));
            }
        }
        for r in &self.generators {
            if let Some(a) = r.alpha.filter(|&a| bad(a)) {
                return Err(Error::Validation(format!("alpha {a} at bus {} is outside [0, 1]", r.bus)));
            }
        }
        Ok(())
    }

    fn rule(&self, bus_number: usize) -> Option<&GateRule> {
        self.generators.iter().find(|r| r.bus == bus_number)
    }
}

/// What the gate did to one generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub generator: usize,
    /// External bus number.
    pub bus: usize,
    pub cq: f64,
    pub gated: bool,
    pub exempt: bool,
    pub zeta: bool,
    pub alpha: f64,
    pub before: GenBounds,
    pub after: GenBounds,
}

/// Tightens the limits of generators at buses scoring at or above `rho`.
pub fn apply_cyber_gate(
    net: &Network,
    bounds: &[GenBounds],
    scores: &ScoreTable,
    gate: &CyberGate,
) -> Result<(Vec<GenBounds>, Vec<GateDecision>)> {
    gate.validate()?;
    if scores.cq.len() != net.n_buses() {
        return Err(Error::Dimension {
            expected: net.n_buses(),
            got: scores.cq.len(),
        });
    }
    for r in &gate.generators {
        if net.bus_id(r.bus).is_none() {
            return Err(Error::Validation(format!("gate rule names unknown bus {}", r.bus)));
        }
    }
    let mut out = bounds.to_vec();
    let mut decisions = Vec::new();
    for (i, g) in net.active_generators() {
        let number = net.bus_number(g.bus);
        let rule = gate.rule(number);
        let cq = scores.cq[g.bus];
        let exempt = rule.is_some_and(|r| r.exempt);
        let zeta = rule.is_some_and(|r| r.zeta);
        let b = bounds[i];
        let floor = if b.p_max > 0.0 { (b.p_min / b.p_max).clamp(0.0, 1.0) } else { 1.0 };
        let requested = rule.and_then(|r| r.alpha).unwrap_or(match gate.alpha_policy {
            AlphaPolicy::Minimum => floor,
            AlphaPolicy::Fixed(a) => a,
        });
        let alpha = requested.max(floor);
        let gated = cq >= gate.rho && !exempt;
        if gated {
            let a = &mut out[i];
            if zeta {
                *a = GenBounds {
                    p_min: 0.0,
                    p_max: 0.0,
                    q_min: 0.0,
                    q_max: 0.0,
                };
            } else {
                a.p_max = alpha * b.p_max;
                if gate.scale_reactive {
                    a.q_max = (alpha * b.q_max).max(b.q_min);
                }
            }
        }
        decisions.push(GateDecision {
            generator: i,
            bus: number,
            cq,
            gated,
            exempt,
            zeta,
            alpha,
            before: b,
            after: out[i],
        });
    }
    Ok((out, decisions))
}

/// Power-flow state at an OPF dispatch.
pub fn snapshot(net: &Network, sol: &OpfSolution) -> Result<SystemState> {
    solve_acpf(net, &build_ybus(net), &sol.dispatch(net), &Default::default())
}

/// Both dispatches of the cyber-constrained pipeline with the scores that
/// drove the gate and the scores after re-dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyberOpfResult {
    pub traditional: OpfSolution,
    pub traditional_state: SystemState,
    pub before: ScoreTable,
    pub decisions: Vec<GateDecision>,
    pub cyber: OpfSolution,
    pub cyber_state: SystemState,
    pub after: ScoreTable,
}

impl CyberOpfResult {
    /// Cost increase over the traditional dispatch, $/h.
    pub fn cost_of_security(&self) -> f64 {
        self.cyber.cost - self.traditional.cost
    }
}

/// Traditional OPF, scoring at its operating point, gating, and re-dispatch.
pub fn solve_c_acopf(
    net: &Network,
    scenario: &CyberScenario,
    config: &ScoreConfig,
    gate: &CyberGate,
    opts: &OpfOptions,
) -> Result<CyberOpfResult> {
    scenario.validate(net)?;
    config.validate()?;
    gate.validate()?;
    let traditional = solve_t_acopf(net, opts)?;
    let traditional_state = snapshot(net, &traditional)?;
    let before = cpes_qsm(net, &traditional_state, scenario, config)?;
    let (bounds, decisions) = apply_cyber_gate(net, &traditional.bounds, &before, gate)?;
    let cyber = solve_opf(net, &bounds, opts)?;
    let cyber_state = snapshot(net, &cyber)?;
    let held = if gate.refresh_crpi { None } else { before.column(Criterion::Crpi) };
    let after = cpes_qsm_with_crpi(net, &cyber_state, scenario, config, held.as_deref())?;
    Ok(CyberOpfResult {
        traditional,
        traditional_state,
        before,
        decisions,
        cyber,
        cyber_state,
        after,
    })
}
