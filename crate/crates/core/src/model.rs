//! Agent wealth state and global accounting.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Non-negative amount of (dimensionless) money.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Wealth(f64);

impl Wealth {
    pub const ZERO: Wealth = Wealth(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Wealth(value))
        } else {
            Err(Error::NegativeWealth(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Wealth {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Wealth::new(value)
    }
}

impl From<Wealth> for f64 {
    fn from(w: Wealth) -> f64 {
        w.0
    }
}

/// The wealth of every agent plus a wealth-ordered index.
///
/// `sorted_index` lists agent ids by ascending wealth, ties broken by id. It
/// is refreshed by [`Population::reindex`], which the engine calls before
/// every pairing pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    wealths: Vec<f64>,
    sorted_index: Vec<u32>,
}

impl Population {
    /// Builds a population from explicit wealth values.
    pub fn from_wealths(wealths: Vec<f64>) -> Result<Self> {
        if wealths.len() < 2 {
            return Err(Error::TooFewAgents(wealths.len()));
        }
        if wealths.len() > u32::MAX as usize {
            return Err(Error::TooFewAgents(wealths.len()));
        }
        if let Some(&bad) = wealths.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::NegativeWealth(bad));
        }
        let mut pop = Population {
            sorted_index: (0..wealths.len() as u32).collect(),
            wealths,
        };
        pop.reindex();
        Ok(pop)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.wealths.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.wealths.is_empty()
    }

    #[inline]
    pub fn wealths(&self) -> &[f64] {
        &self.wealths
    }

    #[inline]
    pub fn wealth(&self, id: usize) -> f64 {
        self.wealths[id]
    }

    pub fn sorted_index(&self) -> &[u32] {
        &self.sorted_index
    }

    pub fn into_wealths(self) -> Vec<f64> {
        self.wealths
    }

    /// Re-sorts the index against the current wealths.
    pub fn reindex(&mut self) {
        let w = &self.wealths;
        // The previous order is usually close to sorted, which the stable
        // merge sort exploits.
        self.sorted_index.sort_by(|&a, &b| {
            w[a as usize]
                .total_cmp(&w[b as usize])
                .then_with(|| a.cmp(&b))
        });
    }

    /// Checks that `sorted_index` is a permutation ordered by (wealth, id).
    pub fn index_is_consistent(&self) -> bool {
        let n = self.len();
        if self.sorted_index.len() != n {
            return false;
        }
        let mut seen = alloc::vec![false; n];
        for &id in &self.sorted_index {
            let id = id as usize;
            if id >= n || seen[id] {
                return false;
            }
            seen[id] = true;
        }
        self.sorted_index.windows(2).all(|p| {
            let (a, b) = (p[0] as usize, p[1] as usize);
            match self.wealths[a].total_cmp(&self.wealths[b]) {
                Ordering::Less => true,
                Ordering::Equal => a < b,
                Ordering::Greater => false,
            }
        })
    }

    pub(crate) fn set_pair(&mut self, i: usize, wi: f64, j: usize, wj: f64) {
        debug_assert!(wi >= 0.0 && wj >= 0.0);
        self.wealths[i] = wi;
        self.wealths[j] = wj;
    }

    /// Adds `amount` to every agent. Adding a constant preserves the order,
    /// so the index stays valid.
    pub(crate) fn add_to_all(&mut self, amount: f64) {
        for w in &mut self.wealths {
            *w += amount;
        }
    }
}

/// `n` agents holding `w0` each.
pub fn init_population(n: usize, w0: Wealth) -> Result<Population> {
    if n < 2 {
        return Err(Error::TooFewAgents(n));
    }
    Population::from_wealths(alloc::vec![w0.get(); n])
}

/// Neumaier-compensated sum of all wealths.
pub fn total_wealth(pop: &Population) -> f64 {
    compensated_sum(pop.wealths())
}

pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Gini coefficient, computed from the order statistics:
/// `G = 2·Σ i·w_(i) / (N·Σw) − (N+1)/N` with 1-based ranks.
pub fn gini(pop: &Population) -> Result<f64> {
    gini_of(pop.wealths())
}

/// Gini coefficient of a bare wealth slice (e.g. pooled realizations).
pub fn gini_of(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = compensated_sum(&sorted);
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    let weighted: Vec<f64> = sorted
        .iter()
        .enumerate()
        .map(|(i, &w)| (i as f64 + 1.0) * w)
        .collect();
    let nf = n as f64;
    let g = 2.0 * compensated_sum(&weighted) / (nf * total) - (nf + 1.0) / nf;
    Ok(g.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn w(v: f64) -> Wealth {
        Wealth::new(v).unwrap()
    }

    #[test]
    fn init_default_scale() {
        let pop = init_population(10_000, w(1000.0)).unwrap();
        assert_eq!(pop.len(), 10_000);
        assert_eq!(total_wealth(&pop), 1.0e7);
    }

    #[test]
    fn init_small_cases() {
        let pop = init_population(2, w(0.0)).unwrap();
        assert_eq!(total_wealth(&pop), 0.0);
        let pop = init_population(3, w(5.0)).unwrap();
        assert_eq!(pop.wealths(), &[5.0, 5.0, 5.0]);
        assert_eq!(total_wealth(&pop), 15.0);
    }

    #[test]
    fn init_rejects_bad_input() {
        assert_eq!(init_population(1, w(1.0)), Err(Error::TooFewAgents(1)));
        assert_eq!(init_population(0, w(1.0)), Err(Error::TooFewAgents(0)));
        assert!(Wealth::new(-1.0).is_err());
        assert!(Wealth::new(f64::NAN).is_err());
        assert!(Population::from_wealths(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn totals() {
        let pop = Population::from_wealths(vec![0.0, 0.0]).unwrap();
        assert_eq!(total_wealth(&pop), 0.0);
        let pop = Population::from_wealths(vec![3.5, 1.5, 5.0]).unwrap();
        assert_eq!(total_wealth(&pop), 10.0);
    }

    #[test]
    fn compensation_beats_naive() {
        let mut v = vec![1.0e16];
        v.extend(core::iter::repeat_n(1.0, 1000));
        assert_eq!(compensated_sum(&v), 1.0e16 + 1000.0);
    }

    #[test]
    fn gini_values() {
        let g = |v: Vec<f64>| gini(&Population::from_wealths(v).unwrap());
        assert_eq!(g(vec![5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!((g(vec![0.0, 0.0, 0.0, 12.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!((g(vec![1.0, 2.0, 3.0]).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(g(vec![0.0, 0.0]), Err(Error::AllZero));
    }

    #[test]
    fn index_orders_by_wealth_then_id() {
        let pop = Population::from_wealths(vec![3.0, 1.0, 3.0, 0.0]).unwrap();
        assert_eq!(pop.sorted_index(), &[3, 1, 0, 2]);
        assert!(pop.index_is_consistent());
    }
}
