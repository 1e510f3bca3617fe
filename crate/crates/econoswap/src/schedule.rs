//! Worker-pool scheduling of realizations and sweep points.
//!
//! Every realization derives its own seed from `(master_seed, index)`, so
//! results do not depend on the number of workers or the order in which
//! jobs finish.

use rayon::prelude::*;
use rayon::ThreadPool;

use econoswap_core::analysis::{beta_grid, find_transition, SweepEntry, SweepResult};
use econoswap_core::{
    run_realization, Error, PairingRule, RealizationResult, SimulationConfig, SimulationResult,
    Wealth,
};

use crate::report::{analyze_samples, AnalysisSettings};

pub const THREADS_ENV: &str = "ECONOSWAP_THREADS";

/// Worker count from `ECONOSWAP_THREADS`; `None` means hardware parallelism.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            )),
        },
    }
}

pub fn build_pool(threads: Option<usize>) -> ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().expect("failed to start worker pool")
}

/// Runs several configurations, spreading all `(config, realization)` jobs
/// over the pool.
pub fn run_many(
    pool: &ThreadPool,
    configs: &[SimulationConfig],
) -> Vec<Result<SimulationResult, Error>> {
    let checked: Vec<Result<(), Error>> = configs.iter().map(SimulationConfig::validate).collect();
    let jobs: Vec<(usize, u32)> = configs
        .iter()
        .enumerate()
        .filter(|(k, _)| checked[*k].is_ok())
        .flat_map(|(k, c)| (0..c.realizations).map(move |r| (k, r)))
        .collect();
    let mut done: Vec<(usize, u32, Result<RealizationResult, Error>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, r)| (k, r, run_realization(&configs[k], r)))
            .collect()
    });
    done.sort_by_key(|(k, r, _)| (*k, *r));
    let mut per_config: Vec<Vec<(u32, Result<RealizationResult, Error>)>> =
        configs.iter().map(|_| Vec::new()).collect();
    for (k, r, outcome) in done {
        per_config[k].push((r, outcome));
    }
    configs
        .iter()
        .zip(checked)
        .zip(per_config)
        .map(|((c, check), outcomes)| check.map(|()| SimulationResult::from_outcomes(*c, outcomes)))
        .collect()
}

pub fn run_simulation_parallel(
    pool: &ThreadPool,
    config: &SimulationConfig,
) -> Result<SimulationResult, Error> {
    run_many(pool, std::slice::from_ref(config)).remove(0)
}

/// Class rule family swept over β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    NonMutual,
    Mutual,
    Mixed { w_limit: Wealth },
}

impl SweepFamily {
    pub fn rule(&self, beta: f64) -> PairingRule {
        match *self {
            SweepFamily::NonMutual => PairingRule::NonMutualClass { beta },
            SweepFamily::Mutual => PairingRule::MutualClass { beta },
            SweepFamily::Mixed { w_limit } => PairingRule::Mixed { beta, w_limit },
        }
    }

    pub fn name(&self) -> &'static str {
        self.rule(1.0).name()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub sweep: SweepResult,
    /// Simulation per grid point, `Err` where the point failed to run.
    pub results: Vec<Result<SimulationResult, Error>>,
}

impl SweepOutcome {
    pub fn max_relative_drift(&self) -> f64 {
        self.results
            .iter()
            .flatten()
            .map(SimulationResult::max_relative_drift)
            .fold(0.0, f64::max)
    }
}

pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    beta_grid(from, to, step)
}

/// One ensemble per β, each classified with `settings`.
pub fn run_sweep(
    pool: &ThreadPool,
    base: &SimulationConfig,
    family: SweepFamily,
    betas: &[f64],
    settings: &AnalysisSettings,
) -> SweepOutcome {
    let configs: Vec<SimulationConfig> = betas
        .iter()
        .map(|&beta| SimulationConfig {
            rule: family.rule(beta),
            ..*base
        })
        .collect();
    let results = run_many(pool, &configs);
    let entries = betas
        .iter()
        .zip(&results)
        .map(|(&beta, res)| sweep_entry(beta, res, settings))
        .collect();
    let mut sweep = SweepResult {
        entries,
        transition_beta: None,
    };
    sweep.transition_beta = find_transition(&sweep).ok().flatten();
    SweepOutcome { sweep, results }
}

fn sweep_entry(
    beta: f64,
    res: &Result<SimulationResult, Error>,
    settings: &AnalysisSettings,
) -> SweepEntry {
    let failed = |msg: String| SweepEntry {
        beta,
        classification: None,
        error: Some(msg),
    };
    let sim = match res {
        Ok(sim) => sim,
        Err(e) => return failed(e.to_string()),
    };
    if sim.realizations.is_empty() {
        return failed("every realization failed".into());
    }
    let partial =
        (!sim.failures.is_empty()).then(|| format!("{} realization(s) failed", sim.failures.len()));
    match analyze_samples(&sim.pooled_wealths(), settings) {
        Ok(a) => SweepEntry {
            beta,
            classification: a.report.classification,
            error: a.report.classification_error.or(partial),
        },
        Err(e) => failed(e.to_string()),
    }
}
