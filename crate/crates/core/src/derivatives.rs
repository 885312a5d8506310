//! First and second derivatives of bus injections and branch flows with
//! respect to polar voltage coordinates. Dense; sized for desk-scale cases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::grid::{BranchAdmittance, Network};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const J: Complex64 = Complex64::new(0.0, 1.0);

fn diag(v: &CVec) -> CMat {
    CMat::from_diagonal(v)
}

fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

fn unit(v: &CVec) -> CVec {
    v.map(|z| z / z.norm())
}

/// Second-derivative blocks of a scalar function of `(Va, Vm)`.
#[derive(Debug, Clone)]
pub struct Hessian<T: nalgebra::Scalar> {
    pub aa: DMatrix<T>,
    pub av: DMatrix<T>,
    pub va: DMatrix<T>,
    pub vv: DMatrix<T>,
}

/// `(dS/dVa, dS/dVm)` for bus injections `S = diag(V) conj(Y V)`.
pub fn dsbus_dv(y: &CMat, v: &CVec) -> (CMat, CMat) {
    let ibus = y * v;
    let dv = diag(v);
    let vn = unit(v);
    let d_va = (&dv * conj(&(diag(&ibus) - y * &dv))) * J;
    let d_vm = &dv * conj(&(y * diag(&vn))) + conj(&diag(&ibus)) * diag(&vn);
    (d_va, d_vm)
}

/// Second derivatives of `lamᵀ S` (complex weights).
pub fn d2sbus_dv2(y: &CMat, v: &CVec, lam: &CVec) -> Hessian<Complex64> {
    let ibus = y * v;
    let diag_lam = diag(lam);
    let dv = diag(v);
    let a = diag(&lam.component_mul(v));
    let b = y * &dv;
    let c = &a * conj(&b);
    let d = y.adjoint() * &dv;
    let dlam = &d * lam;
    let e = diag(&v.map(|z| z.conj())) * (&d * &diag_lam - diag(&dlam));
    let f = &c - &a * diag(&ibus.map(|z| z.conj()));
    let g = diag(&v.map(|z| Complex64::new(1.0 / z.norm(), 0.0)));
    let aa = &e + &f;
    let va = (&g * (&e - &f)) * J;
    let av = va.transpose();
    let vv = &g * (&c + c.transpose()) * &g;
    Hessian { aa, av, va, vv }
}

/// Branch-end admittance rows: `S = diag(C V) conj(Ybr V)`.
#[derive(Debug, Clone)]
pub struct BranchSide {
    /// Bus index of this end for each modelled branch.
    pub bus: Vec<usize>,
    /// `nl x nb` branch admittance rows.
    pub y: CMat,
}

impl BranchSide {
    fn incidence(&self, nb: usize) -> CMat {
        let mut c = CMat::zeros(self.bus.len(), nb);
        for (l, &b) in self.bus.iter().enumerate() {
            c[(l, b)] = Complex64::new(1.0, 0.0);
        }
        c
    }

    pub fn flows(&self, v: &CVec) -> CVec {
        let i = &self.y * v;
        CVec::from_iterator(
            self.bus.len(),
            self.bus.iter().enumerate().map(|(l, &b)| v[b] * i[l].conj()),
        )
    }
}

/// From- and to-side models for the listed branches.
pub fn branch_sides(net: &Network, branches: &[usize]) -> (BranchSide, BranchSide) {
    let nb = net.n_buses();
    let nl = branches.len();
    let mut yf = CMat::zeros(nl, nb);
    let mut yt = CMat::zeros(nl, nb);
    let mut fb = Vec::with_capacity(nl);
    let mut tb = Vec::with_capacity(nl);
    for (l, &k) in branches.iter().enumerate() {
        let br = &net.branches[k];
        let a = BranchAdmittance::of(br);
        yf[(l, br.from_bus)] += a.yff;
        yf[(l, br.to_bus)] += a.yft;
        yt[(l, br.from_bus)] += a.ytf;
        yt[(l, br.to_bus)] += a.ytt;
        fb.push(br.from_bus);
        tb.push(br.to_bus);
    }
    (BranchSide { bus: fb, y: yf }, BranchSide { bus: tb, y: yt })
}

/// `(dS/dVa, dS/dVm)` for one branch side.
pub fn dsbr_dv(side: &BranchSide, v: &CVec) -> (CMat, CMat) {
    let nb = v.len();
    let cbr = side.incidence(nb);
    let ibr = &side.y * v;
    let vbr = &cbr * v;
    let dv = diag(v);
    let vn = diag(&unit(v));
    let di_conj = diag(&ibr.map(|z| z.conj()));
    let d_va = (&di_conj * &cbr * &dv - diag(&vbr) * conj(&(&side.y * &dv))) * J;
    let d_vm = diag(&vbr) * conj(&(&side.y * &vn)) + &di_conj * &cbr * &vn;
    (d_va, d_vm)
}

/// Second derivatives of `lamᵀ S_br` (complex weights).
pub fn d2sbr_dv2(side: &BranchSide, v: &CVec, lam: &CVec) -> Hessian<Complex64> {
    let nb = v.len();
    let cbr = side.incidence(nb);
    let dv = diag(v);
    let a = side.y.adjoint() * diag(lam) * &cbr;
    let b = conj(&dv) * &a * &dv;
    let vc = v.map(|z| z.conj());
    let d = diag(&(&a * v).component_mul(&vc));
    let e = diag(&(a.transpose() * &vc).component_mul(v));
    let f = &b + b.transpose();
    let g = diag(&v.map(|z| Complex64::new(1.0 / z.norm(), 0.0)));
    let aa = &f - &d - &e;
    let va = (&g * (&b - b.transpose() - &d + &e)) * J;
    let av = va.transpose();
    let vv = &g * &f * &g;
    Hessian { aa, av, va, vv }
}

/// Second derivatives of `muᵀ |S_br|²`.
pub fn d2asbr_dv2(
    side: &BranchSide,
    v: &CVec,
    d_va: &CMat,
    d_vm: &CMat,
    sbr: &CVec,
    mu: &DVector<f64>,
) -> Hessian<f64> {
    let weights = CVec::from_iterator(
        mu.len(),
        mu.iter().zip(sbr.iter()).map(|(&m, s)| s.conj() * m),
    );
    let s = d2sbr_dv2(side, v, &weights);
    let dm = diag(&mu.map(|m| Complex64::new(m, 0.0)));
    let part = |base: &CMat, x: &CMat, y: &CMat| -> DMatrix<f64> {
        (base + x.transpose() * &dm * conj(y)).map(|z| 2.0 * z.re)
    };
    Hessian {
        aa: part(&s.aa, d_va, d_va),
        va: part(&s.va, d_vm, d_va),
        av: part(&s.av, d_va, d_vm),
        vv: part(&s.vv, d_vm, d_vm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_ybus, testnets::*};

    fn voltages() -> CVec {
        CVec::from_vec(vec![
            Complex64::from_polar(1.02, 0.0),
            Complex64::from_polar(0.97, -0.08),
            Complex64::from_polar(0.99, 0.05),
        ])
    }

    fn polar(va: &[f64], vm: &[f64]) -> CVec {
        CVec::from_iterator(va.len(), va.iter().zip(vm).map(|(&a, &m)| Complex64::from_polar(m, a)))
    }

    fn net() -> crate::grid::Network {
        let mut net = triangle(0.5);
        net.branches[0].b = 0.05;
        net.branches[2].tap = 1.04;
        net.branches[2].shift = 0.03;
        net.buses[2].shunt_admittance = Complex64::new(0.01, 0.2);
        net
    }

    /// Central differences of `f` in coordinate `k` of the stacked `(Va, Vm)` vector.
    fn fd<F: Fn(&CVec) -> CVec>(f: F, v: &CVec, k: usize) -> CVec {
        let n = v.len();
        let va: Vec<f64> = v.iter().map(|z| z.arg()).collect();
        let vm: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        let h = 1e-6;
        let shift = |s: f64| {
            let (mut a, mut m) = (va.clone(), vm.clone());
            if k < n {
                a[k] += s
            } else {
                m[k - n] += s
            }
            polar(&a, &m)
        };
        (f(&shift(h)) - f(&shift(-h))) / Complex64::new(2.0 * h, 0.0)
    }

    #[test]
    fn sbus_jacobian_matches_finite_differences() {
        let net = net();
        let y = build_ybus(&net).to_dense();
        let v = voltages();
        let (da, dm) = dsbus_dv(&y, &v);
        let s = |v: &CVec| v.component_mul(&(&y * v).map(|z| z.conj()));
        for k in 0..6 {
            let col = fd(s, &v, k);
            let exact = if k < 3 { da.column(k).into_owned() } else { dm.column(k - 3).into_owned() };
            assert!((col - exact).norm() < 1e-7, "column {k}");
        }
    }

    #[test]
    fn sbus_hessian_matches_finite_differences() {
        let net = net();
        let y = build_ybus(&net).to_dense();
        let v = voltages();
        let lam = CVec::from_vec(vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(-1.2, 0.0),
            Complex64::new(0.7, 0.0),
        ]);
        let h = d2sbus_dv2(&y, &v, &lam);
        // gradient of lamᵀ S as a stacked (Va, Vm) vector
        let grad = |v: &CVec| {
            let (da, dm) = dsbus_dv(&y, v);
            let ga = da.transpose() * &lam;
            let gm = dm.transpose() * &lam;
            CVec::from_iterator(6, ga.iter().chain(gm.iter()).copied())
        };
        for k in 0..6 {
            let col = fd(grad, &v, k);
            for r in 0..6 {
                let exact = match (r < 3, k < 3) {
                    (true, true) => h.aa[(r, k)],
                    (true, false) => h.av[(r, k - 3)],
                    (false, true) => h.va[(r - 3, k)],
                    (false, false) => h.vv[(r - 3, k - 3)],
                };
                assert!((col[r] - exact).norm() < 1e-6, "entry ({r},{k}): {} vs {}", col[r], exact);
            }
        }
    }

    #[test]
    fn branch_jacobian_and_flow_hessian_match_finite_differences() {
        let net = net();
        let v = voltages();
        let (from, to) = branch_sides(&net, &[0, 1, 2]);
        for side in [&from, &to] {
            let (da, dm) = dsbr_dv(side, &v);
            for k in 0..6 {
                let col = fd(|v| side.flows(v), &v, k);
                let exact = if k < 3 { da.column(k).into_owned() } else { dm.column(k - 3).into_owned() };
                assert!((col - exact).norm() < 1e-7);
            }
            let mu = DVector::from_vec(vec![0.4, 1.1, 2.0]);
            let s = side.flows(&v);
            let h = d2asbr_dv2(side, &v, &da, &dm, &s, &mu);
            let grad = |v: &CVec| {
                let (da, dm) = dsbr_dv(side, v);
                let s = side.flows(v);
                let mut g = CVec::zeros(6);
                for l in 0..3 {
                    for c in 0..3 {
                        g[c] += Complex64::new(mu[l] * 2.0 * (s[l].conj() * da[(l, c)]).re, 0.0);
                        g[c + 3] += Complex64::new(mu[l] * 2.0 * (s[l].conj() * dm[(l, c)]).re, 0.0);
                    }
                }
                g
            };
            for k in 0..6 {
                let col = fd(grad, &v, k);
                for r in 0..6 {
                    let exact = match (r < 3, k < 3) {
                        (true, true) => h.aa[(r, k)],
                        (true, false) => h.av[(r, k - 3)],
                        (false, true) => h.va[(r - 3, k)],
                        (false, false) => h.vv[(r - 3, k - 3)],
                    };
                    assert!((col[r].re - exact).abs() < 1e-5, "entry ({r},{k}): {} vs {exact}", col[r].re);
                }
            }
        }
    }
}
