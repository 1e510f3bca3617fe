//! Exhaustive enumeration of the sequential draw process for tiny populations.
#![allow(dead_code)]

use std::collections::BTreeMap;

use econoswap_core::{PairingOutcome, PairingRule, Population, SimRng};
use rand::SeedableRng;

/// Pairs as sorted `(lo, hi)` tuples, then the unpaired ids, all sorted.
pub type Canon = (Vec<(u32, u32)>, Vec<u32>);

pub fn canon(outcome: &PairingOutcome) -> Canon {
    let mut pairs: Vec<(u32, u32)> = outcome
        .pairs
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    pairs.sort_unstable();
    let mut unpaired = outcome.unpaired.clone();
    unpaired.sort_unstable();
    (pairs, unpaired)
}

fn window(w: f64, beta: f64) -> (f64, f64) {
    ((w * (1.0 - beta)).max(0.0), w * (1.0 + beta))
}

fn inside(w_i: f64, w_j: f64, beta: f64) -> bool {
    let (lo, hi) = window(w_i, beta);
    lo <= w_j && w_j <= hi
}

/// Written from the rule definitions, independent of `PairingRule::admits`.
pub fn eligible(rule: &PairingRule, wi: f64, wj: f64) -> bool {
    match *rule {
        PairingRule::Random => true,
        PairingRule::NonMutualClass { beta } => inside(wi, wj, beta),
        PairingRule::MutualClass { beta } => inside(wi, wj, beta) && inside(wj, wi, beta),
        PairingRule::Mixed { beta, w_limit } => {
            wi < w_limit.get() || (inside(wi, wj, beta) && inside(wj, wi, beta))
        }
    }
}

/// Probability of every reachable outcome: draw an available agent uniformly,
/// then a partner uniformly among eligible available agents.
pub fn enumerate(rule: &PairingRule, wealths: &[f64]) -> BTreeMap<Canon, f64> {
    fn go(
        rule: &PairingRule,
        w: &[f64],
        avail: &mut Vec<u32>,
        pairs: &mut Vec<(u32, u32)>,
        unpaired: &mut Vec<u32>,
        p: f64,
        out: &mut BTreeMap<Canon, f64>,
    ) {
        if avail.is_empty() {
            let mut ps = pairs.clone();
            ps.sort_unstable();
            let mut us = unpaired.clone();
            us.sort_unstable();
            *out.entry((ps, us)).or_insert(0.0) += p;
            return;
        }
        let snapshot = avail.clone();
        let pd = p / snapshot.len() as f64;
        for &i in &snapshot {
            let rest: Vec<u32> = snapshot.iter().copied().filter(|&x| x != i).collect();
            let cands: Vec<u32> = rest
                .iter()
                .copied()
                .filter(|&j| eligible(rule, w[i as usize], w[j as usize]))
                .collect();
            if cands.is_empty() {
                *avail = rest;
                unpaired.push(i);
                go(rule, w, avail, pairs, unpaired, pd, out);
                unpaired.pop();
            } else {
                let pp = pd / cands.len() as f64;
                for &j in &cands {
                    *avail = rest.iter().copied().filter(|&x| x != j).collect();
                    pairs.push((i.min(j), i.max(j)));
                    go(rule, w, avail, pairs, unpaired, pp, out);
                    pairs.pop();
                }
            }
        }
        *avail = snapshot;
    }
    let mut out = BTreeMap::new();
    let mut avail: Vec<u32> = (0..wealths.len() as u32).collect();
    go(
        rule,
        wealths,
        &mut avail,
        &mut Vec::new(),
        &mut Vec::new(),
        1.0,
        &mut out,
    );
    out
}

pub const RUNS: u32 = 100_000;

/// Runs the implementation `RUNS` times and checks support and frequencies.
pub fn check(
    rule: PairingRule,
    wealths: &[f64],
    seed: u64,
) -> Result<BTreeMap<Canon, f64>, String> {
    let oracle = enumerate(&rule, wealths);
    let total: f64 = oracle.values().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("oracle mass {total}"));
    }

    let pop = Population::from_wealths(wealths.to_vec()).unwrap();
    let mut rng = SimRng::seed_from_u64(seed);
    let mut counts: BTreeMap<Canon, u64> = BTreeMap::new();
    for _ in 0..RUNS {
        let outcome = rule.pair(&pop, &mut rng).map_err(|e| e.to_string())?;
        if !outcome.is_partition_of(wealths.len()) {
            return Err(format!(
                "{rule:?} on {wealths:?}: not a partition: {outcome:?}"
            ));
        }
        let c = canon(&outcome);
        if !oracle.contains_key(&c) {
            return Err(format!(
                "{rule:?} on {wealths:?} produced unreachable outcome {c:?}"
            ));
        }
        *counts.entry(c).or_insert(0) += 1;
    }
    let m = RUNS as f64;
    for (outcome, &p) in &oracle {
        let seen = counts.get(outcome).copied().unwrap_or(0) as f64;
        let sigma = (m * p * (1.0 - p)).sqrt();
        if (seen - m * p).abs() > 3.0 * sigma + 1e-9 {
            return Err(format!(
                "{rule:?} on {wealths:?}: {outcome:?} seen {seen}, expected {:.1} ± {:.1}",
                m * p,
                3.0 * sigma
            ));
        }
    }
    Ok(oracle)
}
