//! Self-contained SVG rendering of a binned distribution with its fit.

use std::f64::consts::LN_10;
use std::fmt::Write as _;

use econoswap_core::analysis::{Bin, BinScheme, Distribution, FitOptions, FitResult};
use econoswap_core::{fit_exponential, fit_power_law};
use thiserror::Error;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;
const MARGIN_LEFT: f64 = 90.0;

const COLOR_POINTS: &str = "#3273dc";
const COLOR_FIT: &str = "#e74c3c";
const COLOR_GRID: &str = "#e8ecef";
const COLOR_AXIS: &str = "#2c3e50";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotMode {
    /// Linear wealth axis, logarithmic density axis.
    Semilog,
    /// Logarithmic wealth and density axes.
    Loglog,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("nothing to draw: need at least 2 non-empty bins, found {0}")]
    NothingToDraw(usize),
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Evenly spaced "nice" ticks covering `[lo, hi]`, at most about `target`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

/// Integer decade ticks, thinned to at most `max` labels.
fn decade_ticks(lo: f64, hi: f64, max: usize) -> Vec<f64> {
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    if b < a {
        return Vec::new();
    }
    let stride = ((b - a) as usize / max.max(1)).max(1) as i64;
    (a..=b)
        .filter(|k| (k - a) % stride == 0)
        .map(|k| k as f64)
        .collect()
}

fn fmt_linear(v: f64) -> String {
    if v.abs() >= 1e5 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}

/// Renders `bins` in the given axis mode with the matching fit overlaid.
pub fn render_svg(bins: &[Bin], mode: PlotMode, title: &str) -> Result<String, PlotError> {
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.count > 0 && b.density > 0.0 && (mode == PlotMode::Semilog || b.center > 0.0))
        .map(|b| {
            let x = match mode {
                PlotMode::Semilog => b.center,
                PlotMode::Loglog => b.center.log10(),
            };
            (x, b.density.log10())
        })
        .collect();
    if pts.len() < 2 {
        return Err(PlotError::NothingToDraw(pts.len()));
    }

    let dist = Distribution {
        scheme: match mode {
            PlotMode::Semilog => BinScheme::Linear,
            PlotMode::Loglog => BinScheme::Logarithmic,
        },
        bins: bins.to_vec(),
        zero_mass: 0.0,
        n_samples: bins.iter().map(|b| b.count).sum(),
    };
    let fit = match mode {
        PlotMode::Semilog => fit_exponential(&dist, &FitOptions::default()),
        PlotMode::Loglog => fit_power_law(&dist, &FitOptions::default()),
    }
    .ok();

    let (xmin, xmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let (ymin, ymax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    let (x0, x1) = match mode {
        PlotMode::Semilog => padded(xmin.min(0.0), xmax),
        PlotMode::Loglog => padded(xmin, xmax),
    };
    let (y0, y1) = padded(ymin, ymax);
    let f = Frame { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = write!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = write!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{}" height="{}"/></clipPath></defs>"#,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );
    let _ = write!(
        s,
        r#"<text x="{}" y="32" text-anchor="middle" font-size="18" font-weight="bold" fill="{COLOR_AXIS}">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let x_ticks: Vec<(f64, String)> = match mode {
        PlotMode::Semilog => nice_ticks(x0, x1, 6)
            .into_iter()
            .map(|t| (t, fmt_linear(t)))
            .collect(),
        PlotMode::Loglog => decade_ticks(x0, x1, 10)
            .into_iter()
            .map(|t| (t, format!("1e{t}")))
            .collect(),
    };
    let y_ticks: Vec<(f64, String)> = decade_ticks(y0, y1, 10)
        .into_iter()
        .map(|t| (t, format!("1e{t}")))
        .collect();
    for (t, label) in &x_ticks {
        let x = f.px(*t);
        let _ = write!(
            s,
            r#"<line x1="{x:.2}" y1="{MARGIN_TOP}" x2="{x:.2}" y2="{:.2}" stroke="{COLOR_GRID}"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="12" fill="{COLOR_AXIS}">{label}</text>"#,
            HEIGHT - MARGIN_BOTTOM,
            HEIGHT - MARGIN_BOTTOM + 18.0
        );
    }
    for (t, label) in &y_ticks {
        let y = f.py(*t);
        let _ = write!(
            s,
            r#"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{COLOR_GRID}"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12" fill="{COLOR_AXIS}">{label}</text>"#,
            WIDTH - MARGIN_RIGHT,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = write!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{}" height="{}" fill="none" stroke="{COLOR_AXIS}"/>"#,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );
    let _ = write!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14" fill="{COLOR_AXIS}">wealth w</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = write!(
        s,
        r#"<text x="24" y="{}" text-anchor="middle" font-size="14" fill="{COLOR_AXIS}" transform="rotate(-90 24 {})">density P(w)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    s.push_str(r#"<g clip-path="url(#plot-area)">"#);
    for (x, y) in &pts {
        let _ = write!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{COLOR_POINTS}" fill-opacity="0.8"/>"#,
            f.px(*x),
            f.py(*y)
        );
    }
    if let Some(fit) = &fit {
        let (a, b) = fit_line(fit, mode);
        let _ = write!(
            s,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{COLOR_FIT}" stroke-width="2"/>"#,
            f.px(a.0),
            f.py(a.1),
            f.px(b.0),
            f.py(b.1)
        );
    }
    s.push_str("</g>");

    let note = match &fit {
        Some(fit) => annotation(fit),
        None => "no fit (fewer than 3 usable bins)".to_string(),
    };
    let _ = write!(
        s,
        r#"<text class="annotation" x="{}" y="{}" text-anchor="end" font-size="14" fill="{COLOR_FIT}">{}</text>"#,
        WIDTH - MARGIN_RIGHT - 10.0,
        MARGIN_TOP + 22.0,
        escape(&note)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Endpoints of the fitted line in plot coordinates over the fit window.
fn fit_line(fit: &FitResult, mode: PlotMode) -> ((f64, f64), (f64, f64)) {
    let (lo, hi) = fit.window;
    match mode {
        PlotMode::Semilog => {
            let y = |w: f64| (fit.intercept - fit.exponent * w) / LN_10;
            ((lo, y(lo)), (hi, y(hi)))
        }
        PlotMode::Loglog => {
            let y = |x: f64| fit.intercept / LN_10 - fit.exponent * x;
            let (a, b) = (lo.max(f64::MIN_POSITIVE).log10(), hi.log10());
            ((a, y(a)), (b, y(b)))
        }
    }
}

pub fn annotation(fit: &FitResult) -> String {
    match fit.model {
        econoswap_core::FitModel::Exponential => {
            format!(
                "exponential fit: rate = {:.4e}, R² = {:.4}",
                fit.exponent, fit.r_squared
            )
        }
        econoswap_core::FitModel::PowerLaw => {
            format!(
                "power-law fit: γ = {:.4}, R² = {:.4}",
                fit.exponent, fit.r_squared
            )
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bins(f: impl Fn(f64) -> f64, edges: &[f64]) -> Vec<Bin> {
        edges
            .windows(2)
            .map(|e| {
                let c = 0.5 * (e[0] + e[1]);
                Bin {
                    lo: e[0],
                    hi: e[1],
                    center: c,
                    count: 100,
                    density: f(c),
                }
            })
            .collect()
    }

    #[test]
    fn semilog_has_fit_and_annotation() {
        let edges: Vec<f64> = (0..=20).map(|k| 250.0 * k as f64).collect();
        let svg = render_svg(
            &bins(|w| (-w / 1000.0).exp() / 1000.0, &edges),
            PlotMode::Semilog,
            "random",
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"class="fit""#));
        assert!(svg.contains("rate = 1.0000e-3"), "{svg}");
        assert_eq!(svg.matches("<circle").count(), 20);
    }

    #[test]
    fn loglog_annotates_gamma() {
        let edges: Vec<f64> = (0..=20).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
        let b: Vec<Bin> = bins(|w| w.powf(-0.7), &edges);
        let svg = render_svg(&b, PlotMode::Loglog, "mutual").unwrap();
        assert!(svg.contains("γ = 0.7"), "{svg}");
    }

    #[test]
    fn one_bin_is_an_error() {
        let b = vec![Bin {
            lo: 0.0,
            hi: 1.0,
            center: 0.5,
            count: 3,
            density: 1.0,
        }];
        assert_eq!(
            render_svg(&b, PlotMode::Semilog, "x"),
            Err(PlotError::NothingToDraw(1))
        );
    }

    #[test]
    fn ticks() {
        assert_eq!(
            nice_ticks(0.0, 10.0, 5),
            vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
        );
        assert_eq!(decade_ticks(-2.5, 1.2, 10), vec![-2.0, -1.0, 0.0, 1.0]);
        assert!(decade_ticks(-90.0, 7.0, 10).len() <= 11);
    }
}
