//! Partner-selection rules.
//!
//! Every rule produces a [`PairingOutcome`] that partitions the population
//! into disjoint pairs and agents left without a partner for the iteration.
//! Eligibility is evaluated on the wealths at the start of the iteration.
//! Exchanges only touch agents that are already processed, so the frozen
//! view is exactly what a fully sequential interleaving would observe.
//!
//! The class rules draw an unprocessed agent uniformly at random, then pick
//! its partner uniformly among the unprocessed agents inside its window. An
//! agent whose window is empty is marked unpaired for the rest of the
//! iteration: the candidate pool only shrinks, so it can never become
//! eligible again. Windows map to contiguous rank intervals of the
//! wealth-sorted index and [`rank_select::RankSelect`] picks uniformly inside
//! them.

mod rank_select;

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

pub use rank_select::RankSelect;

use crate::error::{Error, Result};
use crate::exchange::{check_beta, in_range, mutual_in_range, window_unchecked};
use crate::model::{Population, Wealth};

/// Largest class-rule `beta` inside the studied grid.
pub const STUDIED_BETA_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PairingRule {
    /// Shuffle and pair neighbours.
    Random,
    /// The drawn agent's window `[w(1−β), w(1+β)]` constrains the partner.
    NonMutualClass { beta: f64 },
    /// Both agents must lie in each other's window.
    MutualClass { beta: f64 },
    /// Random below `w_limit`, mutual class rule at or above it.
    Mixed { beta: f64, w_limit: Wealth },
}

impl PairingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PairingRule::Random => Ok(()),
            PairingRule::NonMutualClass { beta } | PairingRule::MutualClass { beta } => {
                check_beta(beta)
            }
            PairingRule::Mixed { beta, w_limit } => {
                check_beta(beta)?;
                if w_limit.get() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidWealthLimit(w_limit.get()))
                }
            }
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            PairingRule::Random => None,
            PairingRule::NonMutualClass { beta }
            | PairingRule::MutualClass { beta }
            | PairingRule::Mixed { beta, .. } => Some(beta),
        }
    }

    /// `beta` above the 0.1..=1.0 grid is accepted but unexplored territory.
    pub fn beta_outside_studied_range(&self) -> bool {
        self.beta().is_some_and(|b| b > STUDIED_BETA_MAX)
    }

    /// Short lower-case label, matching the CLI's `--rule` values.
    pub fn name(&self) -> &'static str {
        match self {
            PairingRule::Random => "random",
            PairingRule::NonMutualClass { .. } => "nonmutual",
            PairingRule::MutualClass { .. } => "mutual",
            PairingRule::Mixed { .. } => "mixed",
        }
    }

    /// Eligibility of `partner` for the drawn agent `initiator` under this rule.
    pub fn admits(&self, initiator: f64, partner: f64) -> bool {
        match *self {
            PairingRule::Random => true,
            PairingRule::NonMutualClass { beta } => in_range(initiator, partner, beta),
            PairingRule::MutualClass { beta } => mutual_in_range(initiator, partner, beta),
            PairingRule::Mixed { beta, w_limit } => {
                initiator < w_limit.get() || mutual_in_range(initiator, partner, beta)
            }
        }
    }

    /// Builds the pairs for one iteration.
    pub fn pair<R: Rng + ?Sized>(&self, pop: &Population, rng: &mut R) -> Result<PairingOutcome> {
        self.validate()?;
        Ok(match *self {
            PairingRule::Random => pair_random(pop.len(), rng)?,
            PairingRule::NonMutualClass { beta } => pair_nonmutual(pop, beta, rng)?,
            PairingRule::MutualClass { beta } => pair_mutual(pop, beta, rng)?,
            PairingRule::Mixed { beta, w_limit } => pair_mixed(pop, beta, w_limit, rng)?,
        })
    }
}

/// Disjoint pairs plus the agents that found no partner.
///
/// Each pair is `(initiator, partner)` in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairingOutcome {
    pub pairs: Vec<(u32, u32)>,
    pub unpaired: Vec<u32>,
}

impl PairingOutcome {
    /// Every id in `0..n` appears exactly once across pairs and unpaired.
    pub fn is_partition_of(&self, n: usize) -> bool {
        if self.pairs.len() * 2 + self.unpaired.len() != n {
            return false;
        }
        let mut seen = alloc::vec![false; n];
        let ids = self
            .pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.unpaired.iter().copied());
        for id in ids {
            let id = id as usize;
            if id >= n || seen[id] {
                return false;
            }
            seen[id] = true;
        }
        true
    }
}

/// Uniform random matching: shuffle ids, pair `(0,1), (2,3), ...`.
pub fn pair_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PairingOutcome> {
    if n < 2 {
        return Err(Error::TooFewAgents(n));
    }
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(rng);
    let mut chunks = ids.chunks_exact(2);
    let pairs = chunks.by_ref().map(|c| (c[0], c[1])).collect();
    let unpaired = chunks.remainder().to_vec();
    Ok(PairingOutcome { pairs, unpaired })
}

pub fn pair_nonmutual<R: Rng + ?Sized>(
    pop: &Population,
    beta: f64,
    rng: &mut R,
) -> Result<PairingOutcome> {
    check_beta(beta)?;
    Ok(pair_by_rank_window(pop, rng, |ranked, wi| {
        nonmutual_interval(ranked, wi, beta)
    }))
}

pub fn pair_mutual<R: Rng + ?Sized>(
    pop: &Population,
    beta: f64,
    rng: &mut R,
) -> Result<PairingOutcome> {
    check_beta(beta)?;
    Ok(pair_by_rank_window(pop, rng, |ranked, wi| {
        mutual_interval(ranked, wi, beta)
    }))
}

pub fn pair_mixed<R: Rng + ?Sized>(
    pop: &Population,
    beta: f64,
    w_limit: Wealth,
    rng: &mut R,
) -> Result<PairingOutcome> {
    check_beta(beta)?;
    let limit = w_limit.get();
    if !(limit > 0.0) {
        return Err(Error::InvalidWealthLimit(limit));
    }
    Ok(pair_by_rank_window(pop, rng, |ranked, wi| {
        if wi < limit {
            (0, ranked.len())
        } else {
            mutual_interval(ranked, wi, beta)
        }
    }))
}

/// Ranks `[a, b)` of partners inside `wi`'s own window.
fn nonmutual_interval(ranked: &[f64], wi: f64, beta: f64) -> (usize, usize) {
    let win = window_unchecked(wi, beta);
    let a = ranked.partition_point(|&w| w < win.lo);
    let b = ranked.partition_point(|&w| w <= win.hi);
    (a, b)
}

/// Ranks `[a, b)` of partners `j` with `mutual_in_range(wi, w_j)`.
///
/// `wi <= w_j(1+β)` is upward closed in `w_j` and `max(0, w_j(1−β)) <= wi`
/// is downward closed (floating-point products are monotone), so the
/// admissible set is one contiguous run of ranks.
fn mutual_interval(ranked: &[f64], wi: f64, beta: f64) -> (usize, usize) {
    let own = window_unchecked(wi, beta);
    let a = ranked.partition_point(|&w| !(w >= own.lo && wi <= window_unchecked(w, beta).hi));
    let b = ranked.partition_point(|&w| w <= own.hi && window_unchecked(w, beta).lo <= wi);
    (a, b)
}

fn pair_by_rank_window<R, F>(pop: &Population, rng: &mut R, interval: F) -> PairingOutcome
where
    R: Rng + ?Sized,
    F: Fn(&[f64], f64) -> (usize, usize),
{
    let n = pop.len();
    let order = pop.sorted_index();
    let ranked: Vec<f64> = order.iter().map(|&id| pop.wealth(id as usize)).collect();
    let mut avail = RankSelect::full(n);
    let mut out = PairingOutcome {
        pairs: Vec::with_capacity(n / 2),
        unpaired: Vec::new(),
    };

    while avail.remaining() > 0 {
        let ri = avail.select(rng.random_range(0..avail.remaining()));
        avail.remove(ri);
        let wi = ranked[ri];
        let (a, b) = interval(&ranked, wi);
        debug_assert!(a <= ri && ri < b);
        let before = avail.prefix(a);
        let eligible = avail.prefix(b) - before;
        if eligible == 0 {
            out.unpaired.push(order[ri]);
            continue;
        }
        let rj = avail.select(before + rng.random_range(0..eligible));
        avail.remove(rj);
        out.pairs.push((order[ri], order[rj]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pop(w: &[f64]) -> Population {
        Population::from_wealths(w.to_vec()).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn sorted_pairs(o: &PairingOutcome) -> Vec<(u32, u32)> {
        let mut p: Vec<_> = o.pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        p.sort();
        p
    }

    #[test]
    fn random_counts() {
        let o = pair_random(4, &mut rng(1)).unwrap();
        assert_eq!((o.pairs.len(), o.unpaired.len()), (2, 0));
        let o = pair_random(5, &mut rng(1)).unwrap();
        assert_eq!((o.pairs.len(), o.unpaired.len()), (2, 1));
        assert!(o.is_partition_of(5));
        let o = pair_random(10_000, &mut rng(1)).unwrap();
        assert_eq!(o.pairs.len(), 5000);
        assert!(pair_random(1, &mut rng(1)).is_err());
    }

    #[test]
    fn nonmutual_equal_wealth_is_perfect() {
        let p = pop(&[7.0; 10]);
        for s in 0..20 {
            let o = pair_nonmutual(&p, 0.1, &mut rng(s)).unwrap();
            assert!(o.unpaired.is_empty());
            assert!(o.is_partition_of(10));
        }
    }

    #[test]
    fn nonmutual_rich_agent_is_stranded() {
        let p = pop(&[100.0, 100.0, 1e6]);
        for s in 0..50 {
            let o = pair_nonmutual(&p, 0.1, &mut rng(s)).unwrap();
            assert_eq!(sorted_pairs(&o), vec![(0, 1)]);
            assert_eq!(o.unpaired, vec![2]);
        }
    }

    #[test]
    fn nonmutual_two_clusters() {
        let p = pop(&[0.0, 0.0, 500.0, 550.0]);
        for s in 0..50 {
            let o = pair_nonmutual(&p, 0.1, &mut rng(s)).unwrap();
            assert_eq!(sorted_pairs(&o), vec![(0, 1), (2, 3)]);
        }
    }

    #[test]
    fn mutual_examples() {
        let p = pop(&[100.0, 210.0]);
        let o = pair_mutual(&p, 0.5, &mut rng(3)).unwrap();
        assert!(o.pairs.is_empty());
        assert_eq!(o.unpaired.len(), 2);

        let p = pop(&[100.0, 150.0, 225.0]);
        let mut seen = [false; 2];
        for s in 0..200 {
            let o = pair_mutual(&p, 0.5, &mut rng(s)).unwrap();
            match sorted_pairs(&o).as_slice() {
                [(0, 1)] => seen[0] = true,
                [(1, 2)] => seen[1] = true,
                other => panic!("unexpected outcome {other:?}"),
            }
            assert_eq!(o.unpaired.len(), 1);
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn mixed_examples() {
        let limit = Wealth::new(1000.0).unwrap();
        let p = pop(&[500.0, 5000.0, 5200.0]);
        let mut seen = vec![];
        for s in 0..200 {
            let o = pair_mixed(&p, 0.1, limit, &mut rng(s)).unwrap();
            let sp = sorted_pairs(&o);
            assert_eq!(o.pairs.len(), 1);
            if o.pairs[0].0 != 0 {
                assert_eq!(
                    sp,
                    vec![(1, 2)],
                    "rich initiator must pick the rich partner"
                );
            }
            if !seen.contains(&sp) {
                seen.push(sp);
            }
        }
        seen.sort();
        assert_eq!(seen, vec![vec![(0, 1)], vec![(0, 2)], vec![(1, 2)]]);
        assert!(pair_mixed(&p, 0.1, Wealth::ZERO, &mut rng(0)).is_err());
    }

    #[test]
    fn mixed_boundary_uses_class_branch() {
        let rule = PairingRule::Mixed {
            beta: 0.1,
            w_limit: Wealth::new(1000.0).unwrap(),
        };
        assert!(!rule.admits(1000.0, 10.0));
        assert!(rule.admits(999.0, 1e9));
    }

    #[test]
    fn class_rules_reject_bad_beta() {
        let p = pop(&[1.0, 2.0]);
        assert_eq!(
            pair_mutual(&p, 0.0, &mut rng(0)),
            Err(Error::InvalidBeta(0.0))
        );
        assert!(pair_nonmutual(&p, -1.0, &mut rng(0)).is_err());
        assert!(PairingRule::MutualClass { beta: f64::NAN }
            .validate()
            .is_err());
        assert!(PairingRule::NonMutualClass { beta: 1.5 }.beta_outside_studied_range());
    }

    #[test]
    fn zero_wealth_agents_pair_with_each_other() {
        let p = pop(&[0.0, 0.0, 0.0, 0.0]);
        let o = pair_mutual(&p, 0.3, &mut rng(9)).unwrap();
        assert_eq!(o.pairs.len(), 2);
    }
}
