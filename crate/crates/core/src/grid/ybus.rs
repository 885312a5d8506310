use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

use super::{Branch, Network};

/// Two-port pi-model admittances of one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub yff: Complex64,
    pub yft: Complex64,
    pub ytf: Complex64,
    pub ytt: Complex64,
}

impl BranchAdmittance {
    pub fn of(br: &Branch) -> Self {
        let ys = br.series_admittance();
        let half_b = Complex64::new(0.0, br.b / 2.0);
        let tap = Complex64::from_polar(br.tap, br.shift);
        let ytt = ys + half_b;
        BranchAdmittance {
            yff: ytt / (tap * tap.conj()),
            yft: -ys / tap.conj(),
            ytf: -ys / tap,
            ytt,
        }
    }

    /// Complex power leaving each end, `(S_from, S_to)`.
    pub fn flows(&self, vf: Complex64, vt: Complex64) -> (Complex64, Complex64) {
        let i_f = self.yff * vf + self.yft * vt;
        let i_t = self.ytf * vf + self.ytt * vt;
        (vf * i_f.conj(), vt * i_t.conj())
    }
}

/// Sparse bus admittance matrix stored as sorted rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmittanceMatrix {
    n: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl AdmittanceMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        let row = &self.rows[k];
        match row.binary_search_by_key(&m, |&(c, _)| c) {
            Ok(i) => row[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Nonzero entries of row `k` as `(column, value)`.
    pub fn row(&self, k: usize) -> &[(usize, Complex64)] {
        &self.rows[k]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, y)| y * v[c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, row) in self.rows.iter().enumerate() {
            for &(c, y) in row {
                m[(k, c)] = y;
            }
        }
        m
    }

    pub fn mul_dense(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_vec(self.mul_vec(v.as_slice()))
    }
}

/// Assembles the bus admittance matrix from in-service branches and shunts.
pub fn build_ybus(net: &Network) -> AdmittanceMatrix {
    let n = net.n_buses();
    let mut acc: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
    let mut add = |k: usize, m: usize, y: Complex64| {
        *acc[k].entry(m).or_insert(Complex64::new(0.0, 0.0)) += y;
    };
    for (_, br) in net.active_branches() {
        let a = BranchAdmittance::of(br);
        let (f, t) = (br.from_bus, br.to_bus);
        add(f, f, a.yff);
        add(f, t, a.yft);
        add(t, f, a.ytf);
        add(t, t, a.ytt);
    }
    for b in &net.buses {
        if b.shunt_admittance.norm() != 0.0 {
            add(b.id, b.id, b.shunt_admittance);
        }
    }
    AdmittanceMatrix {
        n,
        rows: acc.into_iter().map(|r| r.into_iter().collect()).collect(),
    }
}
