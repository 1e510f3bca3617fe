//! Iteration loop, open-economy injection, seeding and ensembles.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exchange::{transact, ExchangeDraw};
use crate::model::{init_population, total_wealth, Population, Wealth};
use crate::pairing::PairingRule;

/// Generator behind every realization. Part of the reproducibility contract.
pub type SimRng = ChaCha8Rng;

/// Adds `amount` to every agent once every `period` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpenEconomyPolicy {
    pub period: u32,
    pub amount: Wealth,
}

impl OpenEconomyPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidInjectionPeriod);
        }
        if !(self.amount.get() > 0.0) {
            return Err(Error::InvalidInjectionAmount(self.amount.get()));
        }
        Ok(())
    }

    /// Whether an injection follows iteration `k` (1-based).
    #[inline]
    pub fn fires_after(&self, k: u32) -> bool {
        k.is_multiple_of(self.period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub initial_wealth: Wealth,
    pub iterations: u32,
    pub rule: PairingRule,
    pub open_policy: Option<OpenEconomyPolicy>,
    pub master_seed: u64,
    pub realizations: u32,
}

impl Default for SimulationConfig {
    /// 10⁴ agents with 1000 each, 500 iterations, ten realizations, closed
    /// economy under the random rule.
    fn default() -> Self {
        SimulationConfig {
            n_agents: 10_000,
            initial_wealth: Wealth::new(1000.0).unwrap(),
            iterations: 500,
            rule: PairingRule::Random,
            open_policy: None,
            master_seed: 0,
            realizations: 10,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::TooFewAgents(self.n_agents));
        }
        if self.iterations == 0 {
            return Err(Error::ZeroCount("iterations"));
        }
        if self.realizations == 0 {
            return Err(Error::ZeroCount("realizations"));
        }
        self.rule.validate()?;
        if let Some(p) = &self.open_policy {
            p.validate()?;
        }
        Ok(())
    }

    /// Total wealth the accounting predicts after `k` completed iterations.
    pub fn expected_total(&self, k: u32) -> f64 {
        let n = self.n_agents as f64;
        let base = n * self.initial_wealth.get();
        match &self.open_policy {
            None => base,
            Some(p) => base + n * p.amount.get() * f64::from(k / p.period),
        }
    }
}

/// Output of a single realization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RealizationResult {
    pub index: u32,
    pub seed: u64,
    pub final_wealths: Vec<f64>,
    /// Total wealth before the first iteration, then after every iteration
    /// (including any injection that follows it). Length `iterations + 1`.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RealizationFailure {
    pub index: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationResult {
    pub config: SimulationConfig,
    /// Successful realizations, ordered by index.
    pub realizations: Vec<RealizationResult>,
    pub failures: Vec<RealizationFailure>,
}

impl SimulationResult {
    /// Assembles per-realization outcomes produced by any scheduler.
    pub fn from_outcomes<I>(config: SimulationConfig, outcomes: I) -> Self
    where
        I: IntoIterator<Item = (u32, Result<RealizationResult>)>,
    {
        let mut realizations = Vec::new();
        let mut failures = Vec::new();
        for (index, outcome) in outcomes {
            match outcome {
                Ok(r) => realizations.push(r),
                Err(error) => failures.push(RealizationFailure {
                    index,
                    message: error.to_string(),
                }),
            }
        }
        realizations.sort_by_key(|r| r.index);
        failures.sort_by_key(|f| f.index);
        SimulationResult {
            config,
            realizations,
            failures,
        }
    }

    /// All final wealth samples, realizations concatenated in index order.
    pub fn pooled_wealths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.realizations.len() * self.config.n_agents);
        for r in &self.realizations {
            out.extend_from_slice(&r.final_wealths);
        }
        out
    }

    /// Largest relative deviation of any trace entry from the accounting
    /// prediction (constant for a closed economy, stepped for an open one).
    pub fn max_relative_drift(&self) -> f64 {
        max_relative_drift(
            &self.config,
            self.realizations.iter().map(|r| r.trace.as_slice()),
        )
    }
}

pub fn max_relative_drift<'a, I>(config: &SimulationConfig, traces: I) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut worst = 0.0f64;
    for trace in traces {
        for (k, &t) in trace.iter().enumerate() {
            let expected = config.expected_total(k as u32);
            let dev = libm::fabs(t - expected);
            let rel = if expected > 0.0 { dev / expected } else { dev };
            worst = worst.max(rel);
        }
    }
    worst
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-realization seed: a stateless mix of the master seed and the index.
pub fn derive_seed(master_seed: u64, index: u32) -> u64 {
    splitmix64(master_seed ^ splitmix64(u64::from(index)))
}

/// One sweep: pair everyone under `rule`, then exchange within each pair in
/// emission order.
pub fn run_iteration<R: Rng + ?Sized>(
    pop: &mut Population,
    rule: &PairingRule,
    rng: &mut R,
) -> Result<()> {
    pop.reindex();
    let outcome = rule.pair(pop, rng)?;
    for &(i, j) in &outcome.pairs {
        let (i, j) = (i as usize, j as usize);
        let draw = ExchangeDraw::sample(rng);
        let (wi, wj) = transact(pop.wealth(i), pop.wealth(j), draw);
        pop.set_pair(i, wi, j, wj);
    }
    Ok(())
}

pub fn inject_wealth(pop: &mut Population, amount: Wealth) -> Result<()> {
    if !(amount.get() > 0.0) {
        return Err(Error::InvalidInjectionAmount(amount.get()));
    }
    pop.add_to_all(amount.get());
    Ok(())
}

/// Runs realization `index` of `config` from its derived seed.
pub fn run_realization(config: &SimulationConfig, index: u32) -> Result<RealizationResult> {
    config.validate()?;
    let seed = derive_seed(config.master_seed, index);
    let mut rng = SimRng::seed_from_u64(seed);
    let mut pop = init_population(config.n_agents, config.initial_wealth)?;
    let mut trace = Vec::with_capacity(config.iterations as usize + 1);
    trace.push(total_wealth(&pop));
    for k in 1..=config.iterations {
        run_iteration(&mut pop, &config.rule, &mut rng)?;
        if let Some(policy) = &config.open_policy {
            if policy.fires_after(k) {
                inject_wealth(&mut pop, policy.amount)?;
            }
        }
        trace.push(total_wealth(&pop));
    }
    Ok(RealizationResult {
        index,
        seed,
        final_wealths: pop.into_wealths(),
        trace,
    })
}

/// Runs every realization serially.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let outcomes = (0..config.realizations).map(|r| (r, run_realization(config, r)));
    Ok(SimulationResult::from_outcomes(*config, outcomes))
}
