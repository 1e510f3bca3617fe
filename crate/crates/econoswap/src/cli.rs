//! `econoswap run | sweep | analyze | plot`.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
//! 3 numerical or analysis failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use econoswap_core::analysis::BinScheme;
use econoswap_core::{
    Error as CoreError, OpenEconomyPolicy, PairingRule, SimulationConfig, Wealth,
};

use crate::files::{self, AnalysisFile, FileError, RunManifest, SweepFile, FORMAT_VERSION};
use crate::plot::{self, PlotMode};
use crate::report::{analyze_samples, AnalysisSettings};
use crate::schedule::{self, SweepFamily};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::File(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "econoswap",
    version,
    about = "Kinetic wealth-exchange simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an ensemble of simulations and write the result file.
    Run(RunArgs),
    /// Run one ensemble per β grid point and classify each.
    Sweep(SweepArgs),
    /// Bin and fit a stored result; writes PREFIX.csv and PREFIX.json.
    Analyze(AnalyzeArgs),
    /// Render a distribution CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Random,
    Nonmutual,
    Mutual,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BinningArg {
    Linear,
    Log,
}

impl From<BinningArg> for BinScheme {
    fn from(b: BinningArg) -> Self {
        match b {
            BinningArg::Linear => BinScheme::Linear,
            BinningArg::Log => BinScheme::Logarithmic,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SharedArgs {
    #[arg(long, default_value_t = 10_000)]
    pub agents: usize,
    #[arg(long, default_value_t = 1000.0, allow_negative_numbers = true)]
    pub w0: f64,
    #[arg(long, default_value_t = 500)]
    pub iterations: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub realizations: u32,
    #[arg(long, requires = "inject_period", allow_negative_numbers = true)]
    pub inject_amount: Option<f64>,
    #[arg(long, requires = "inject_amount")]
    pub inject_period: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::Random)]
    pub rule: RuleArg,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub wlimit: Option<f64>,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BinningArgs {
    #[arg(long, value_enum)]
    pub binning: Option<BinningArg>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value_t = econoswap_core::analysis::DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub rule: RuleArg,
    #[arg(long, allow_negative_numbers = true)]
    pub wlimit: Option<f64>,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub beta_from: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta_to: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub beta_step: f64,
    #[command(flatten)]
    pub binning: BinningArgs,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Result file written by `run`.
    pub input: PathBuf,
    #[command(flatten)]
    pub binning: BinningArgs,
    /// Fit window on bin centers, `LO:HI` (either side may be empty).
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    #[arg(long)]
    pub breakpoint: Option<f64>,
    /// Output prefix; `.csv` and `.json` are appended.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Distribution CSV written by `analyze`.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: PlotMode,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let side = |v: &str, default: f64| -> Result<f64, String> {
        if v.trim().is_empty() {
            Ok(default)
        } else {
            v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"))
        }
    };
    let (lo, hi) = (side(lo, 0.0)?, side(hi, f64::INFINITY)?);
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(format!("empty window {s:?}"));
    }
    Ok((lo, hi))
}

/// Names the flag behind a configuration error.
fn usage_from(err: CoreError) -> CliError {
    let flag = match err {
        CoreError::InvalidBeta(_) => "--beta",
        CoreError::InvalidWealthLimit(_) => "--wlimit",
        CoreError::TooFewAgents(_) => "--agents",
        CoreError::NegativeWealth(_) => "--w0",
        CoreError::InvalidInjectionAmount(_) => "--inject-amount",
        CoreError::InvalidInjectionPeriod => "--inject-period",
        CoreError::ZeroCount("iterations") => "--iterations",
        CoreError::ZeroCount("realizations") => "--realizations",
        CoreError::ZeroCount("bin count") => "--bins",
        CoreError::ZeroCount("beta step") => "--beta-step",
        _ => return CliError::Numerical(err.to_string()),
    };
    CliError::Usage(format!("invalid value for {flag}: {err}"))
}

fn wealth_flag(flag: &str, v: f64) -> Result<Wealth, CliError> {
    Wealth::new(v).map_err(|e| CliError::Usage(format!("invalid value for {flag}: {e}")))
}

fn base_config(shared: &SharedArgs, rule: PairingRule) -> Result<SimulationConfig, CliError> {
    let open_policy = match (shared.inject_amount, shared.inject_period) {
        (Some(amount), Some(period)) => Some(OpenEconomyPolicy {
            period,
            amount: wealth_flag("--inject-amount", amount)?,
        }),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "--inject-amount and --inject-period must be given together".into(),
            ))
        }
    };
    let config = SimulationConfig {
        n_agents: shared.agents,
        initial_wealth: wealth_flag("--w0", shared.w0)?,
        iterations: shared.iterations,
        rule,
        open_policy,
        master_seed: shared.seed,
        realizations: shared.realizations,
    };
    config.validate().map_err(usage_from)?;
    Ok(config)
}

fn require(v: Option<f64>, flag: &str, rule: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{flag} is required for --rule {rule}")))
}

pub fn rule_from_flags(
    rule: RuleArg,
    beta: Option<f64>,
    wlimit: Option<f64>,
) -> Result<PairingRule, CliError> {
    let rule = match rule {
        RuleArg::Random => PairingRule::Random,
        RuleArg::Nonmutual => PairingRule::NonMutualClass {
            beta: require(beta, "--beta", "nonmutual")?,
        },
        RuleArg::Mutual => PairingRule::MutualClass {
            beta: require(beta, "--beta", "mutual")?,
        },
        RuleArg::Mixed => PairingRule::Mixed {
            beta: require(beta, "--beta", "mixed")?,
            w_limit: Wealth::new(require(wlimit, "--wlimit", "mixed")?).map_err(|_| {
                usage_from(CoreError::InvalidWealthLimit(wlimit.unwrap_or(f64::NAN)))
            })?,
        },
    };
    rule.validate().map_err(usage_from)?;
    Ok(rule)
}

fn pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = schedule::threads_from_env().map_err(CliError::Usage)?;
    Ok(schedule::build_pool(threads))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn rule_label(rule: &PairingRule) -> String {
    match *rule {
        PairingRule::Random => "rule=random".into(),
        PairingRule::NonMutualClass { beta } | PairingRule::MutualClass { beta } => {
            format!("rule={} beta={beta}", rule.name())
        }
        PairingRule::Mixed { beta, w_limit } => {
            format!("rule=mixed beta={beta} wlimit={}", w_limit.get())
        }
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let rule = rule_from_flags(args.rule, args.beta, args.wlimit)?;
    let config = base_config(&args.shared, rule)?;
    if rule.beta_outside_studied_range() {
        eprintln!("warning: beta above 1.0 is outside the studied 0.1..=1.0 range");
    }
    let result = schedule::run_simulation_parallel(&pool()?, &config)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    for f in &result.failures {
        eprintln!("realization {} failed: {}", f.index, f.message);
    }
    if result.realizations.is_empty() {
        return Err(CliError::Numerical("every realization failed".into()));
    }
    let out = &args.shared.out;
    files::write_result(out, &result)?;
    let drift = result.max_relative_drift();
    let elapsed = start.elapsed().as_secs_f64();
    let mut manifest = RunManifest::new("run", Some(config));
    manifest.artifacts.push(path_str(out));
    manifest.wall_clock_seconds = elapsed;
    manifest.conservation_drift = Some(drift);
    files::write_manifest(&files::manifest_path(out), &manifest)?;
    println!(
        "{} realizations={} drift={drift:.3e} runtime={elapsed:.2}s out={}",
        rule_label(&rule),
        result.realizations.len(),
        out.display()
    );
    Ok(())
}

fn settings_from(binning: &BinningArgs, default: BinScheme) -> Result<AnalysisSettings, CliError> {
    let scheme = binning.binning.map(BinScheme::from).unwrap_or(default);
    let mut s = AnalysisSettings::for_scheme(scheme);
    if let Some(bins) = binning.bins {
        if bins == 0 {
            return Err(usage_from(CoreError::ZeroCount("bin count")));
        }
        s.bins = bins;
    }
    if !(0.0..=1.0).contains(&binning.threshold) {
        return Err(CliError::Usage(format!(
            "invalid value for --threshold: must lie in [0, 1], got {}",
            binning.threshold
        )));
    }
    s.threshold = binning.threshold;
    Ok(s)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let family = match args.rule {
        RuleArg::Random => {
            return Err(CliError::Usage(
                "invalid value for --rule: random has no beta to sweep".into(),
            ))
        }
        RuleArg::Nonmutual => SweepFamily::NonMutual,
        RuleArg::Mutual => SweepFamily::Mutual,
        RuleArg::Mixed => SweepFamily::Mixed {
            w_limit: wealth_flag("--wlimit", require(args.wlimit, "--wlimit", "mixed")?)?,
        },
    };
    let betas = schedule::grid(args.beta_from, args.beta_to, args.beta_step).map_err(|e| {
        CliError::Usage(format!(
            "invalid beta grid (--beta-from/--beta-to/--beta-step): {e}"
        ))
    })?;
    // Validate once with the first grid point so flag errors surface early.
    let base = base_config(&args.shared, family.rule(betas[0]))?;
    let settings = settings_from(&args.binning, BinScheme::Logarithmic)?;
    let outcome = schedule::run_sweep(&pool()?, &base, family, &betas, &settings);

    for e in &outcome.sweep.entries {
        match (&e.classification, &e.error) {
            (Some(c), err) => {
                println!(
                    "beta={} verdict={:?} exp_r2={:.4} pow_r2={:.4} gamma={:.4}{}",
                    e.beta,
                    c.verdict,
                    c.exponential.r_squared,
                    c.power_law.r_squared,
                    c.power_law.exponent,
                    err.as_ref().map(|m| format!(" ({m})")).unwrap_or_default()
                );
            }
            (None, err) => println!(
                "beta={} failed: {}",
                e.beta,
                err.as_deref().unwrap_or("unknown error")
            ),
        }
    }
    match outcome.sweep.transition_beta {
        Some(t) => println!("transition_beta={t}"),
        None => println!("transition_beta=none"),
    }

    let drift = outcome.max_relative_drift();
    let file = SweepFile {
        format_version: FORMAT_VERSION,
        rule: family.name().to_string(),
        base_config: base,
        scheme: settings.scheme,
        bins: settings.bins,
        min_count: settings.min_count,
        threshold: settings.threshold,
        sweep: outcome.sweep.clone(),
        conservation_drift: drift,
    };
    let out = &args.shared.out;
    files::write_sweep(out, &file)?;
    let mut manifest = RunManifest::new("sweep", Some(base));
    manifest.artifacts.push(path_str(out));
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.conservation_drift = Some(drift);
    files::write_manifest(&files::manifest_path(out), &manifest)?;

    if outcome
        .sweep
        .entries
        .iter()
        .all(|e| e.classification.is_none())
    {
        return Err(CliError::Numerical(
            "no grid point could be classified".into(),
        ));
    }
    Ok(())
}

fn strip_known_extension(p: &Path) -> PathBuf {
    match p.extension().and_then(|e| e.to_str()) {
        Some("csv" | "json") => p.with_extension(""),
        _ => p.to_path_buf(),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Output paths `(csv, json, manifest)` for an analyze prefix.
pub fn analyze_outputs(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let prefix = strip_known_extension(out);
    let json = with_suffix(&prefix, ".json");
    let manifest = files::manifest_path(&json);
    (with_suffix(&prefix, ".csv"), json, manifest)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut settings = settings_from(&args.binning, BinScheme::Logarithmic)?;
    settings.window = args.window;
    settings.breakpoint = args.breakpoint;
    let sim = files::read_result(&args.input)?;
    let analysis = analyze_samples(&sim.pooled_wealths(), &settings)
        .map_err(|e| CliError::Numerical(format!("{}: {e}", args.input.display())))?;

    let (csv, json, manifest_file) = analyze_outputs(&args.out);
    files::write_distribution_csv(&csv, &analysis.distribution)?;
    files::write_analysis(
        &json,
        &AnalysisFile {
            format_version: FORMAT_VERSION,
            source: path_str(&args.input),
            report: analysis.report.clone(),
        },
    )?;
    let mut manifest = RunManifest::new("analyze", Some(sim.config));
    manifest.artifacts = vec![path_str(&csv), path_str(&json)];
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.conservation_drift = Some(sim.max_relative_drift());
    files::write_manifest(&manifest_file, &manifest)?;

    let r = &analysis.report;
    if let Some(c) = &r.classification {
        println!(
            "verdict={:?} | {} | {}",
            c.verdict,
            plot::annotation(&c.exponential),
            plot::annotation(&c.power_law)
        );
    }
    if let Some(s) = &r.split {
        println!(
            "split at {}: verdict={:?} | body {} | tail {}",
            s.breakpoint,
            s.verdict,
            plot::annotation(&s.body),
            plot::annotation(&s.tail)
        );
    }
    match (settings.breakpoint, &r.split_error, &r.classification_error) {
        (Some(_), Some(e), _) => Err(CliError::Numerical(format!("split fit failed: {e}"))),
        (None, _, Some(e)) => Err(CliError::Numerical(format!("classification failed: {e}"))),
        _ => Ok(()),
    }
}

pub fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let bins = files::read_distribution_csv(&args.input)?;
    let title = args.title.clone().unwrap_or_else(|| {
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let svg = plot::render_svg(&bins, args.mode, &title)
        .map_err(|e| CliError::Numerical(format!("{}: {e}", args.input.display())))?;
    files::write_atomic(&args.out, svg.as_bytes())?;
    let mut manifest = RunManifest::new("plot", None);
    manifest.artifacts.push(path_str(&args.out));
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    files::write_manifest(&files::manifest_path(&args.out), &manifest)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
