//! λ-fuzzy measures and Choquet-integral aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;
/// Measures are tabulated for every subset up to this many criteria.
const MAX_TABLE: usize = 20;

/// Interaction index: the root of `prod(1 + λ w_i) = 1 + λ` other than zero.
///
/// Negative when the weights sum above one, positive when below, and zero
/// for additive weights.
pub fn solve_lambda(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::Domain("no criteria weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
        return Err(Error::Domain(format!("weight {w} is outside (0, 1)")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() <= EPS || weights.len() == 1 {
        return Ok(0.0);
    }
    let f = |l: f64| weights.iter().map(|w| 1.0 + l * w).product::<f64>() - (1.0 + l);
    let (mut lo, mut hi) = if sum > 1.0 {
        (-1.0 + EPS, -EPS)
    } else {
        let mut hi = 1.0;
        while f(hi) <= 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numeric("cannot bracket the interaction index".into()));
            }
        }
        (EPS, hi)
    };
    let f_lo = f(lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo <= f64::EPSILON * mid.abs() {
            return Ok(mid);
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A λ-fuzzy measure over `n` criteria; subsets are bit masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMeasure {
    weights: Vec<f64>,
    lambda: f64,
    #[serde(skip)]
    table: Option<Vec<f64>>,
}

impl FuzzyMeasure {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let lambda = solve_lambda(weights)?;
        Ok(Self::with_lambda(weights, lambda))
    }

    /// Measure from an explicit interaction index.
    pub fn with_lambda(weights: &[f64], lambda: f64) -> Self {
        assert!(weights.len() <= 64, "at most 64 criteria");
        let mut m = FuzzyMeasure {
            weights: weights.to_vec(),
            lambda,
            table: None,
        };
        if weights.len() <= MAX_TABLE {
            m.table = Some((0..1u64 << weights.len()).map(|s| m.compute(s)).collect());
        }
        m
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn full(&self) -> u64 {
        if self.n() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        }
    }

    fn compute(&self, subset: u64) -> f64 {
        if subset == 0 {
            return 0.0;
        }
        if subset == self.full() {
            return 1.0;
        }
        let members = (0..self.n()).filter(|&i| subset >> i & 1 == 1);
        if self.lambda == 0.0 {
            return members.map(|i| self.weights[i]).sum();
        }
        let prod: f64 = members.map(|i| 1.0 + self.lambda * self.weights[i]).product();
        ((prod - 1.0) / self.lambda).abs()
    }

    /// Measure of the subset whose members are the set bits of `subset`.
    pub fn measure(&self, subset: u64) -> f64 {
        match &self.table {
            Some(t) => t[subset as usize],
            None => self.compute(subset),
        }
    }

    /// Measure of the subset listed by criterion index.
    pub fn measure_of(&self, members: &[usize]) -> f64 {
        self.measure(members.iter().fold(0u64, |m, &i| m | 1 << i))
    }

    /// Residual of the defining equation at the stored λ.
    pub fn lambda_residual(&self) -> f64 {
        let l = self.lambda;
        self.weights.iter().map(|w| 1.0 + l * w).product::<f64>() - (1.0 + l)
    }

    /// Choquet integral of `x` with respect to this measure.
    pub fn choquet(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: x.len(),
            });
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let mut remaining = self.full();
        let mut prev = 0.0;
        let mut ci = 0.0;
        for &i in &order {
            ci += (x[i] - prev) * self.measure(remaining);
            prev = x[i];
            remaining &= !(1u64 << i);
        }
        Ok(ci)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CASE: [f64; 5] = [0.26, 0.55, 0.61, 0.65, 0.66];

    /// Independent root finder: dense scan then secant refinement.
    fn oracle_lambda(w: &[f64]) -> f64 {
        let f = |l: f64| w.iter().map(|x| 1.0 + l * x).product::<f64>() - (1.0 + l);
        let mut a = -0.999_999;
        let steps = 100_000;
        let h = 0.999_998 / steps as f64;
        for _ in 0..steps {
            if f(a) * f(a + h) <= 0.0 {
                break;
            }
            a += h;
        }
        let (mut x0, mut x1) = (a, a + h);
        for _ in 0..50 {
            let (f0, f1) = (f(x0), f(x1));
            if f1 == f0 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            x1 = x2;
        }
        x1
    }

    #[test]
    fn lambda_matches_independent_root() {
        for w in [&CASE[..], &[0.42, 0.5, 0.62], &[0.3, 0.9]] {
            let l = solve_lambda(w).unwrap();
            assert!((l - oracle_lambda(w)).abs() < 1e-9, "{w:?}");
            assert!(l > -1.0 && l < 0.0);
        }
    }

    #[test]
    fn additive_and_positive_lambda() {
        assert_eq!(solve_lambda(&[0.5, 0.5]).unwrap(), 0.0);
        let m = FuzzyMeasure::new(&[0.5, 0.5]).unwrap();
        assert_eq!(m.measure(0b11), 1.0);
        let w = [0.1, 0.2, 0.3];
        let l = solve_lambda(&w).unwrap();
        assert!(l > 0.0);
        assert!(FuzzyMeasure::new(&w).unwrap().lambda_residual().abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(solve_lambda(&[0.5, 1.0]).is_err());
        assert!(solve_lambda(&[0.0, 0.5]).is_err());
        assert!(solve_lambda(&[]).is_err());
    }

    #[test]
    fn singletons_and_bounds() {
        let m = FuzzyMeasure::new(&CASE).unwrap();
        for (i, w) in CASE.iter().enumerate() {
            assert!((m.measure(1 << i) - w).abs() < 1e-15);
        }
        assert_eq!(m.measure(0), 0.0);
        assert_eq!(m.measure(0b11111), 1.0);
    }

    #[test]
    fn pair_measure_by_hand() {
        let m = FuzzyMeasure::new(&CASE).unwrap();
        let l = m.lambda();
        let hand = CASE[0] + CASE[1] + l * CASE[0] * CASE[1];
        assert!((m.measure_of(&[0, 1]) - hand).abs() < 1e-14);
    }

    #[test]
    fn lattice_is_monotone() {
        let m = FuzzyMeasure::new(&CASE).unwrap();
        for a in 0u64..32 {
            for i in 0..5 {
                assert!(m.measure(a) <= m.measure(a | 1 << i) + 1e-15);
            }
        }
    }

    #[test]
    fn choquet_indicator_and_constant() {
        let m = FuzzyMeasure::new(&CASE).unwrap();
        for i in 0..5 {
            let mut x = [0.0; 5];
            x[i] = 1.0;
            assert!((m.choquet(&x).unwrap() - CASE[i]).abs() < 1e-15);
        }
        assert!((m.choquet(&[0.3; 5]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(m.choquet(&[0.0; 5]).unwrap(), 0.0);
        assert!(matches!(m.choquet(&[0.1; 4]), Err(Error::Dimension { expected: 5, got: 4 })));
    }

    #[test]
    fn choquet_hand_evaluation() {
        // x = (0.5, 0.2, 0.05, 0, 0): increments over nested top sets
        let m = FuzzyMeasure::new(&CASE).unwrap();
        let x = [0.5, 0.2, 0.05, 0.0, 0.0];
        let hand = 0.05 * m.measure_of(&[0, 1, 2]) + 0.15 * m.measure_of(&[0, 1]) + 0.3 * CASE[0];
        assert!((m.choquet(&x).unwrap() - hand).abs() < 1e-15);
    }

    #[test]
    fn on_demand_measure_for_many_criteria() {
        let w = vec![0.1; 25];
        let m = FuzzyMeasure::new(&w).unwrap();
        assert!(m.table.is_none());
        assert!((m.measure(1 << 7) - 0.1).abs() < 1e-15);
        assert!((m.choquet(&[0.4; 25]).unwrap() - 0.4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn choquet_monotone_and_idempotent(
            x in proptest::collection::vec(0.0f64..1.0, 5),
            i in 0usize..5,
            bump in 0.0f64..0.5,
            c in 0.0f64..2.0,
        ) {
            let m = FuzzyMeasure::new(&CASE).unwrap();
            let base = m.choquet(&x).unwrap();
            let mut y = x.clone();
            y[i] += bump;
            prop_assert!(m.choquet(&y).unwrap() >= base - 1e-12);
            prop_assert!((m.choquet(&[c; 5]).unwrap() - c).abs() <= 1e-12);
            let max = x.iter().cloned().fold(0.0, f64::max);
            prop_assert!(base <= max + 1e-12);
        }

        #[test]
        fn permuting_criteria_with_weights(x in proptest::collection::vec(0.0f64..1.0, 5), rot in 0usize..5) {
            let m = FuzzyMeasure::new(&CASE).unwrap();
            let mut w = CASE.to_vec();
            let mut y = x.clone();
            w.rotate_left(rot);
            y.rotate_left(rot);
            let p = FuzzyMeasure::new(&w).unwrap();
            prop_assert!((m.choquet(&x).unwrap() - p.choquet(&y).unwrap()).abs() < 1e-12);
        }
    }
}
