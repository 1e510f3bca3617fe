//! Binning, least-squares model fits and shape classification.
//!
//! Fits work on the binned probability density. An exponential density is a
//! straight line in `(w, ln p)`, a power law is a straight line in
//! `(ln w, ln p)`; both are fitted by ordinary least squares and judged by
//! the squared Pearson correlation of the regression points.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default R² acceptance threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.95;
/// Bins with fewer samples than this are left out of fits.
pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_LOG_BINS: usize = 40;
pub const DEFAULT_LINEAR_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BinScheme {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub count: u64,
    pub density: f64,
}

impl Bin {
    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Normalized wealth histogram. Exact zeros are kept out of the bins and
/// reported as `zero_mass`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Distribution {
    pub scheme: BinScheme,
    pub bins: Vec<Bin>,
    pub zero_mass: f64,
    pub n_samples: u64,
}

impl Distribution {
    /// `Σ density·width + zero_mass`; one for any histogram built here.
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.density * b.width()).sum::<f64>() + self.zero_mass
    }

    /// Complementary CDF `P(W > hi)` at every bin's upper edge.
    pub fn ccdf(&self) -> Vec<(f64, f64)> {
        let mut below = self.zero_mass;
        self.bins
            .iter()
            .map(|b| {
                below += b.density * b.width();
                (b.hi, (1.0 - below).max(0.0))
            })
            .collect()
    }
}

/// Bins `samples` into `bin_count` bins.
///
/// Linear bins span `[0, max]` with equal widths. Logarithmic bins span
/// `[min positive, max]` with a constant ratio. The last bin is closed on
/// the right; all others are half-open.
pub fn build_histogram(
    samples: &[f64],
    scheme: BinScheme,
    bin_count: usize,
) -> Result<Distribution> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if bin_count == 0 {
        return Err(Error::ZeroCount("bin count"));
    }
    if let Some(&bad) = samples.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::NegativeWealth(bad));
    }
    let mut min_pos = f64::INFINITY;
    let mut max = 0.0f64;
    let mut zeros = 0u64;
    for &w in samples {
        if w == 0.0 {
            zeros += 1;
        } else {
            min_pos = min_pos.min(w);
        }
        max = max.max(w);
    }
    if max == 0.0 {
        return Err(Error::AllZero);
    }

    let edges = match scheme {
        BinScheme::Linear => {
            let step = max / bin_count as f64;
            let mut e: Vec<f64> = (0..bin_count).map(|k| k as f64 * step).collect();
            e.push(max);
            e
        }
        BinScheme::Logarithmic => {
            if min_pos == max {
                return Err(Error::DegenerateRange);
            }
            let (l0, l1) = (libm::log(min_pos), libm::log(max));
            let step = (l1 - l0) / bin_count as f64;
            let mut e: Vec<f64> = (0..bin_count)
                .map(|k| libm::exp(l0 + k as f64 * step))
                .collect();
            e[0] = min_pos;
            e.push(max);
            e
        }
    };

    let mut counts = alloc::vec![0u64; bin_count];
    for &w in samples {
        if w > 0.0 {
            counts[locate(&edges, scheme, w)] += 1;
        }
    }

    let n = samples.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let (lo, hi) = (edges[k], edges[k + 1]);
            let center = match scheme {
                BinScheme::Linear => 0.5 * (lo + hi),
                BinScheme::Logarithmic => libm::sqrt(lo * hi),
            };
            let width = hi - lo;
            let density = if count == 0 {
                0.0
            } else {
                count as f64 / (n * width)
            };
            Bin {
                lo,
                hi,
                center,
                count,
                density,
            }
        })
        .collect();
    Ok(Distribution {
        scheme,
        bins,
        zero_mass: zeros as f64 / n,
        n_samples: samples.len() as u64,
    })
}

/// Index of the bin holding `w` (with `edges[0] <= w <= edges[last]`).
fn locate(edges: &[f64], scheme: BinScheme, w: f64) -> usize {
    let nb = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[nb]);
    let guess = match scheme {
        BinScheme::Linear => (w - lo) / (hi - lo) * nb as f64,
        BinScheme::Logarithmic => libm::log(w / lo) / libm::log(hi / lo) * nb as f64,
    };
    let mut k = if guess.is_finite() && guess > 0.0 {
        (guess as usize).min(nb - 1)
    } else {
        0
    };
    // The closed-form guess can be off by one at the edges.
    while k > 0 && w < edges[k] {
        k -= 1;
    }
    while k + 1 < nb && w >= edges[k + 1] {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitModel {
    Exponential,
    PowerLaw,
}

/// A fitted density model.
///
/// For [`FitModel::Exponential`], `ln p = intercept − exponent·w` (the
/// exponent is the rate `1/T`). For [`FitModel::PowerLaw`],
/// `ln p = intercept − exponent·ln w` (the exponent is γ).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub model: FitModel,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Span `(lo of first bin, hi of last bin)` of the bins used.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl FitResult {
    pub fn passes(&self, threshold: f64) -> bool {
        self.r_squared >= threshold
    }
}

/// Which bins enter a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Inclusive bounds on bin centers.
    pub window: Option<(f64, f64)>,
    pub min_count: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            window: None,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

impl FitOptions {
    pub fn with_window(lo: f64, hi: f64) -> Self {
        FitOptions {
            window: Some((lo, hi)),
            ..FitOptions::default()
        }
    }
}

/// Squared Pearson correlation of `(xs, ys)`.
pub fn pearson_r_squared(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(regress(xs, ys)?.r_squared)
}

struct Regression {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn regress(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientBins(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Variances below rounding noise of the means count as degenerate.
    let tiny = |s: f64, m: f64| !(s > n * (m * f64::EPSILON) * (m * f64::EPSILON));
    if tiny(sxx, mx) || tiny(syy, my) {
        return Err(Error::DegenerateVariance);
    }
    let slope = sxy / sxx;
    let r_squared = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    Ok(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

fn usable_bins<'a>(
    dist: &'a Distribution,
    opts: &'a FitOptions,
) -> Result<impl Iterator<Item = &'a Bin> + 'a> {
    if let Some((lo, hi)) = opts.window {
        if !(lo <= hi) {
            return Err(Error::InvalidWindow(lo, hi));
        }
    }
    Ok(dist.bins.iter().filter(move |b| {
        b.count >= opts.min_count.max(1)
            && b.density > 0.0
            && b.center > 0.0
            && opts
                .window
                .is_none_or(|(lo, hi)| b.center >= lo && b.center <= hi)
    }))
}

fn fit(dist: &Distribution, opts: &FitOptions, model: FitModel) -> Result<FitResult> {
    let bins: Vec<&Bin> = usable_bins(dist, opts)?.collect();
    if bins.len() < 3 {
        return Err(Error::InsufficientBins(bins.len()));
    }
    let xs: Vec<f64> = bins
        .iter()
        .map(|b| match model {
            FitModel::Exponential => b.center,
            FitModel::PowerLaw => libm::log(b.center),
        })
        .collect();
    let ys: Vec<f64> = bins.iter().map(|b| libm::log(b.density)).collect();
    let reg = regress(&xs, &ys)?;
    Ok(FitResult {
        model,
        exponent: -reg.slope,
        intercept: reg.intercept,
        r_squared: reg.r_squared,
        window: (bins[0].lo, bins[bins.len() - 1].hi),
        n_points: bins.len(),
    })
}

/// Least squares of `ln p` against `w`.
pub fn fit_exponential(dist: &Distribution, opts: &FitOptions) -> Result<FitResult> {
    fit(dist, opts, FitModel::Exponential)
}

/// Least squares of `ln p` against `ln w`.
pub fn fit_power_law(dist: &Distribution, opts: &FitOptions) -> Result<FitResult> {
    fit(dist, opts, FitModel::PowerLaw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Exponential,
    PowerLaw,
    Mixed,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub verdict: Verdict,
    pub threshold: f64,
    pub exponential: FitResult,
    pub power_law: FitResult,
}

fn verdict_of(exp: &FitResult, pow: &FitResult, threshold: f64) -> Verdict {
    let (best, verdict) = if pow.r_squared > exp.r_squared {
        (pow, Verdict::PowerLaw)
    } else {
        (exp, Verdict::Exponential)
    };
    if best.passes(threshold) {
        verdict
    } else {
        Verdict::Indeterminate
    }
}

/// Fits both models on the same bins and keeps the better one if it clears
/// `threshold`.
pub fn classify(dist: &Distribution, threshold: f64) -> Result<Classification> {
    classify_with(dist, &FitOptions::default(), threshold)
}

pub fn classify_with(
    dist: &Distribution,
    opts: &FitOptions,
    threshold: f64,
) -> Result<Classification> {
    let exponential = fit_exponential(dist, opts)?;
    let power_law = fit_power_law(dist, opts)?;
    Ok(Classification {
        verdict: verdict_of(&exponential, &power_law, threshold),
        threshold,
        exponential,
        power_law,
    })
}

/// Exponential body below a breakpoint, power-law tail above it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitFit {
    pub breakpoint: f64,
    pub body: FitResult,
    pub tail: FitResult,
    /// `Mixed` when both sides clear the threshold, otherwise the
    /// whole-range classification (`Indeterminate` if that cannot be fitted).
    pub verdict: Verdict,
}

pub fn split_fit(dist: &Distribution, breakpoint: f64, threshold: f64) -> Result<SplitFit> {
    split_fit_with(dist, breakpoint, threshold, DEFAULT_MIN_COUNT)
}

pub fn split_fit_with(
    dist: &Distribution,
    breakpoint: f64,
    threshold: f64,
    min_count: u64,
) -> Result<SplitFit> {
    let below = FitOptions {
        window: Some((f64::MIN_POSITIVE, next_down(breakpoint))),
        min_count,
    };
    let above = FitOptions {
        window: Some((next_up(breakpoint), f64::INFINITY)),
        min_count,
    };
    let body = fit_exponential(dist, &below)?;
    let tail = fit_power_law(dist, &above)?;
    let verdict = if body.passes(threshold) && tail.passes(threshold) {
        Verdict::Mixed
    } else {
        let whole = FitOptions {
            window: None,
            min_count,
        };
        classify_with(dist, &whole, threshold).map_or(Verdict::Indeterminate, |c| c.verdict)
    };
    Ok(SplitFit {
        breakpoint,
        body,
        tail,
        verdict,
    })
}

fn next_up(x: f64) -> f64 {
    libm::nextafter(x, f64::INFINITY)
}

fn next_down(x: f64) -> f64 {
    libm::nextafter(x, f64::NEG_INFINITY)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepEntry {
    pub beta: f64,
    /// `None` when the grid point could not be classified.
    pub classification: Option<Classification>,
    pub error: Option<alloc::string::String>,
}

impl SweepEntry {
    pub fn verdict(&self) -> Option<Verdict> {
        self.classification.map(|c| c.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    /// Ordered by strictly increasing `beta`.
    pub entries: Vec<SweepEntry>,
    pub transition_beta: Option<f64>,
}

/// Largest `beta` classified as a power law.
pub fn find_transition(sweep: &SweepResult) -> Result<Option<f64>> {
    if sweep.entries.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(sweep
        .entries
        .iter()
        .filter(|e| e.verdict() == Some(Verdict::PowerLaw))
        .map(|e| e.beta)
        .fold(None, |best: Option<f64>, b| {
            Some(best.map_or(b, |x| x.max(b)))
        }))
}

/// The β grid `from, from+step, ..., to` (inclusive within half a step).
pub fn beta_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from > 0.0) || !from.is_finite() {
        return Err(Error::InvalidBeta(from));
    }
    if !(to >= from) || !to.is_finite() {
        return Err(Error::InvalidBeta(to));
    }
    if from == to {
        return Ok(alloc::vec![from]);
    }
    if !(step > 0.0) {
        return Err(Error::ZeroCount("beta step"));
    }
    let count = libm::floor((to - from) / step + 0.5) as usize;
    // Rounded to 12 decimals so 0.1 + 2·0.1 prints as 0.3.
    Ok((0..=count)
        .map(|k| libm::round((from + k as f64 * step) * 1e12) / 1e12)
        .collect())
}
