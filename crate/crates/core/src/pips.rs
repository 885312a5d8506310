//! Primal-dual interior-point method for smooth nonlinear programs
//!
//! ```text
//! min f(x)  s.t.  g(x) = 0,  h(x) <= 0
//! ```
//!
//! Inequalities get slack variables `z > 0` with a logarithmic barrier whose
//! weight shrinks by `sigma` every iteration. Dense linear algebra.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Constraint values and Jacobians (one row per constraint).
#[derive(Debug, Clone)]
pub struct Constraints {
    pub g: DVector<f64>,
    pub dg: DMatrix<f64>,
    pub h: DVector<f64>,
    pub dh: DMatrix<f64>,
}

pub trait Nlp {
    fn nx(&self) -> usize;
    /// Objective value and gradient.
    fn objective(&self, x: &DVector<f64>) -> (f64, DVector<f64>);
    fn constraints(&self, x: &DVector<f64>) -> Constraints;
    /// Hessian of `cost_mult * f + lamᵀ g + muᵀ h`.
    fn hessian(&self, x: &DVector<f64>, lam: &DVector<f64>, mu: &DVector<f64>, cost_mult: f64) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipsOptions {
    pub feastol: f64,
    pub gradtol: f64,
    pub comptol: f64,
    pub costtol: f64,
    pub max_iter: usize,
    /// Objective scaling applied inside the solver.
    pub cost_mult: f64,
    /// Fraction of the step to the boundary.
    pub xi: f64,
    /// Barrier reduction factor.
    pub sigma: f64,
    pub z0: f64,
    pub alpha_min: f64,
}

impl Default for PipsOptions {
    fn default() -> Self {
        PipsOptions {
            feastol: 1e-6,
            gradtol: 1e-6,
            comptol: 1e-6,
            costtol: 1e-6,
            max_iter: 150,
            cost_mult: 1e-4,
            xi: 0.99995,
            sigma: 0.1,
            z0: 1.0,
            alpha_min: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipsStatus {
    Converged,
    MaxIterations,
    NumericalFailure,
}

/// Scaled termination measures of the final iterate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub feasibility: f64,
    pub gradient: f64,
    pub complementarity: f64,
    pub cost: f64,
}

impl Conditions {
    fn met(&self, o: &PipsOptions) -> bool {
        self.feasibility < o.feastol && self.gradient < o.gradtol && self.complementarity < o.comptol && self.cost < o.costtol
    }

    /// Largest of the four measures.
    pub fn max(&self) -> f64 {
        self.feasibility.max(self.gradient).max(self.complementarity).max(self.cost)
    }
}

#[derive(Debug, Clone)]
pub struct PipsResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub status: PipsStatus,
    pub iterations: usize,
    pub lam: DVector<f64>,
    pub mu: DVector<f64>,
    pub z: DVector<f64>,
    pub conditions: Conditions,
}

impl PipsResult {
    pub fn converged(&self) -> bool {
        self.status == PipsStatus::Converged
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn conditions(
    x: &DVector<f64>,
    c: &Constraints,
    lx: &DVector<f64>,
    lam: &DVector<f64>,
    mu: &DVector<f64>,
    z: &DVector<f64>,
    f: f64,
    f0: f64,
) -> Conditions {
    let maxh = c.h.iter().cloned().fold(0.0_f64, f64::max);
    Conditions {
        feasibility: inf_norm(&c.g).max(maxh) / (1.0 + inf_norm(x).max(inf_norm(z))),
        gradient: inf_norm(lx) / (1.0 + inf_norm(lam).max(inf_norm(mu))),
        complementarity: z.dot(mu) / (1.0 + inf_norm(x)),
        cost: (f - f0).abs() / (1.0 + f0.abs()),
    }
}

fn lagrangian_gradient(df: &DVector<f64>, c: &Constraints, lam: &DVector<f64>, mu: &DVector<f64>) -> DVector<f64> {
    df + c.dg.tr_mul(lam) + c.dh.tr_mul(mu)
}

/// Runs the interior-point iterations from `x0`.
pub fn pips<P: Nlp + ?Sized>(nlp: &P, x0: DVector<f64>, opts: &PipsOptions) -> PipsResult {
    let nx = nlp.nx();
    let mut x = x0;
    let (f_raw, df_raw) = nlp.objective(&x);
    let mut f = f_raw * opts.cost_mult;
    let mut df = df_raw * opts.cost_mult;
    let mut c = nlp.constraints(&x);
    let (neq, niq) = (c.g.len(), c.h.len());

    let mut gamma = 1.0;
    let mut lam = DVector::zeros(neq);
    let mut z = DVector::from_element(niq, opts.z0);
    let mut mu = DVector::from_element(niq, opts.z0);
    for i in 0..niq {
        if c.h[i] < -opts.z0 {
            z[i] = -c.h[i];
        }
        if gamma / z[i] > opts.z0 {
            mu[i] = gamma / z[i];
        }
    }
    let mut f0 = f;
    let mut lx = lagrangian_gradient(&df, &c, &lam, &mu);
    let mut cond = conditions(&x, &c, &lx, &lam, &mu, &z, f, f0);
    let mut status = if cond.met(opts) { PipsStatus::Converged } else { PipsStatus::MaxIterations };
    let mut it = 0;

    while status != PipsStatus::Converged && it < opts.max_iter {
        it += 1;
        let lxx = nlp.hessian(&x, &lam, &mu, opts.cost_mult);
        // M = Lxx + dhᵀ diag(mu/z) dh,  N = Lx + dhᵀ ((mu∘h + gamma) / z)
        let w = DVector::from_iterator(niq, (0..niq).map(|i| mu[i] / z[i]));
        let mut scaled = c.dh.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let m = &lxx + c.dh.tr_mul(&scaled);
        let rhs_h = DVector::from_iterator(niq, (0..niq).map(|i| (mu[i] * c.h[i] + gamma) / z[i]));
        let n = &lx + c.dh.tr_mul(&rhs_h);

        let dim = nx + neq;
        let mut kkt = DMatrix::zeros(dim, dim);
        kkt.view_mut((0, 0), (nx, nx)).copy_from(&m);
        kkt.view_mut((0, nx), (nx, neq)).copy_from(&c.dg.transpose());
        kkt.view_mut((nx, 0), (neq, nx)).copy_from(&c.dg);
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, nx).copy_from(&(-&n));
        rhs.rows_mut(nx, neq).copy_from(&(-&c.g));
        let Some(sol) = kkt.lu().solve(&rhs) else {
            status = PipsStatus::NumericalFailure;
            break;
        };
        if sol.iter().any(|v| !v.is_finite()) {
            status = PipsStatus::NumericalFailure;
            break;
        }
        let dx = sol.rows(0, nx).into_owned();
        let dlam = sol.rows(nx, neq).into_owned();
        let dz = -&c.h - &z - &c.dh * &dx;
        let dmu = DVector::from_iterator(niq, (0..niq).map(|i| -mu[i] + (gamma - mu[i] * dz[i]) / z[i]));

        let step = |v: &DVector<f64>, dv: &DVector<f64>| -> f64 {
            let lim = (0..v.len())
                .filter(|&i| dv[i] < 0.0)
                .map(|i| v[i] / -dv[i])
                .fold(f64::INFINITY, f64::min);
            (opts.xi * lim).min(1.0)
        };
        let alpha_p = step(&z, &dz);
        let alpha_d = step(&mu, &dmu);

        x += alpha_p * dx;
        z += alpha_p * dz;
        lam += alpha_d * dlam;
        mu += alpha_d * dmu;
        if niq > 0 {
            gamma = opts.sigma * z.dot(&mu) / niq as f64;
        }

        let (f_raw, df_raw) = nlp.objective(&x);
        f = f_raw * opts.cost_mult;
        df = df_raw * opts.cost_mult;
        c = nlp.constraints(&x);
        lx = lagrangian_gradient(&df, &c, &lam, &mu);
        cond = conditions(&x, &c, &lx, &lam, &mu, &z, f, f0);
        if cond.met(opts) {
            status = PipsStatus::Converged;
            break;
        }
        if x.iter().any(|v| !v.is_finite())
            || alpha_p < opts.alpha_min
            || alpha_d < opts.alpha_min
            || !(f64::EPSILON..=1.0 / f64::EPSILON).contains(&gamma)
        {
            status = PipsStatus::NumericalFailure;
            break;
        }
        f0 = f;
    }

    PipsResult {
        f: f / opts.cost_mult,
        x,
        status,
        iterations: it,
        lam: lam / opts.cost_mult,
        mu: mu / opts.cost_mult,
        z,
        conditions: cond,
    }
}
