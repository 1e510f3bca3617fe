//! Analysis of pooled wealth samples as written by `analyze`.

use econoswap_core::analysis::{
    classify_with, split_fit_with, BinScheme, Classification, Distribution, FitOptions, SplitFit,
    DEFAULT_LINEAR_BINS, DEFAULT_LOG_BINS, DEFAULT_MIN_COUNT, DEFAULT_THRESHOLD,
};
use econoswap_core::{build_histogram, gini_of, Error};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub scheme: BinScheme,
    pub bins: usize,
    pub min_count: u64,
    pub window: Option<(f64, f64)>,
    pub threshold: f64,
    pub breakpoint: Option<f64>,
}

impl AnalysisSettings {
    /// 40 log bins for power-law views, 100 linear bins for semilog views.
    pub fn for_scheme(scheme: BinScheme) -> Self {
        AnalysisSettings {
            scheme,
            bins: match scheme {
                BinScheme::Linear => DEFAULT_LINEAR_BINS,
                BinScheme::Logarithmic => DEFAULT_LOG_BINS,
            },
            min_count: DEFAULT_MIN_COUNT,
            window: None,
            threshold: DEFAULT_THRESHOLD,
            breakpoint: None,
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            window: self.window,
            min_count: self.min_count,
        }
    }
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings::for_scheme(BinScheme::Logarithmic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub settings: AnalysisSettings,
    pub n_samples: u64,
    pub zero_mass: f64,
    pub mean: f64,
    pub gini: Option<f64>,
    pub classification: Option<Classification>,
    pub classification_error: Option<String>,
    pub split: Option<SplitFit>,
    pub split_error: Option<String>,
    /// `(w, P(W > w))` at bin upper edges. For inspection only.
    pub ccdf: Vec<(f64, f64)>,
}

impl AnalysisReport {
    /// The split verdict when a breakpoint was requested, else the plain one.
    pub fn verdict(&self) -> Option<econoswap_core::Verdict> {
        match (&self.settings.breakpoint, &self.split) {
            (Some(_), Some(s)) => Some(s.verdict),
            (Some(_), None) => None,
            (None, _) => self.classification.map(|c| c.verdict),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub distribution: Distribution,
    pub report: AnalysisReport,
}

/// Bins, fits and classifies `samples`. Only binning failures are errors;
/// fit failures are recorded in the report.
pub fn analyze_samples(samples: &[f64], settings: &AnalysisSettings) -> Result<Analysis, Error> {
    let distribution = build_histogram(samples, settings.scheme, settings.bins)?;
    let (classification, classification_error) =
        match classify_with(&distribution, &settings.fit_options(), settings.threshold) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let (split, split_error) = match settings.breakpoint {
        None => (None, None),
        Some(bp) => match split_fit_with(&distribution, bp, settings.threshold, settings.min_count)
        {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let report = AnalysisReport {
        settings: *settings,
        n_samples: distribution.n_samples,
        zero_mass: distribution.zero_mass,
        mean,
        gini: gini_of(samples).ok(),
        classification,
        classification_error,
        split,
        split_error,
        ccdf: distribution.ccdf(),
    };
    Ok(Analysis {
        distribution,
        report,
    })
}
