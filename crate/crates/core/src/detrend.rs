//! Trend extraction for annual series.
//!
//! Two smoothers are provided. The cubic smoothing spline minimizes
//! `sum (x_i - mu_i)^2 + lambda * integral(mu'')^2` with the penalty weight
//! derived from a frequency-response cutoff: the stiffness parameter is the
//! fraction of the series length at which the spline passes 50% of a
//! sinusoid's amplitude, the usual convention for spline detrending of yearly
//! records. The supersmoother is a variable-span local linear smoother that
//! picks its span per point by leave-one-out cross-validation over three
//! candidate spans, with an optional bass control that biases the choice
//! toward smoother fits.

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::linalg::solve_pentadiagonal;
use crate::series::Decomposition;

/// Trend method selector plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetrendConfig {
    pub method: DetrendMethod,
    /// Spline 50%-response wavelength as a fraction of the series length,
    /// in (0, 1].
    pub spline_stiffness: f64,
    /// Supersmoother bass enhancer in [0, 10]; larger favors wider spans.
    pub friedman_bass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetrendMethod {
    Spline,
    Friedman,
}

impl Default for DetrendConfig {
    fn default() -> Self {
        DetrendConfig {
            method: DetrendMethod::Spline,
            spline_stiffness: DEFAULT_STIFFNESS,
            friedman_bass: 0.0,
        }
    }
}

pub const DEFAULT_STIFFNESS: f64 = 0.67;

impl DetrendConfig {
    pub fn run(&self, series: &AnnualSeries) -> Result<Decomposition> {
        match self.method {
            DetrendMethod::Spline => detrend_spline(series, self.spline_stiffness),
            DetrendMethod::Friedman => detrend_friedman(series, self.friedman_bass),
        }
    }
}

/// Cubic smoothing spline detrend. The trend is the spline whose frequency
/// response is 0.5 at wavelength `stiffness * N` years; the cycle is the
/// residual and the noise component is left at zero for later stages.
pub fn detrend_spline(series: &AnnualSeries, stiffness: f64) -> Result<Decomposition> {
    let n = series.len();
    if n < 8 {
        return Err(Error::InsufficientData { len: n, min: 8 });
    }
    if !(stiffness > 0.0 && stiffness <= 1.0) {
        return Err(Error::Parameter(format!(
            "stiffness must be in (0,1], got {stiffness}"
        )));
    }
    let cutoff = stiffness * n as f64;
    let trend = smoothing_spline(series.values(), cutoff)?;
    let cycle: Vec<f64> = series
        .values()
        .iter()
        .zip(trend.iter())
        .map(|(x, t)| x - t)
        .collect();
    let noise = vec![0.0; n];
    Decomposition::new(
        series.clone(),
        trend,
        cycle,
        noise,
        vec![format!("detrend:spline:{stiffness}")],
    )
}

/// Supersmoother detrend; see the module docs for the span-selection scheme.
pub fn detrend_friedman(series: &AnnualSeries, bass: f64) -> Result<Decomposition> {
    let n = series.len();
    if n < 10 {
        return Err(Error::InsufficientData { len: n, min: 10 });
    }
    if !(0.0..=10.0).contains(&bass) {
        return Err(Error::Parameter(format!(
            "bass must be in [0,10], got {bass}"
        )));
    }
    let trend = supersmoother(series.values(), bass);
    let cycle: Vec<f64> = series
        .values()
        .iter()
        .zip(trend.iter())
        .map(|(x, t)| x - t)
        .collect();
    let noise = vec![0.0; n];
    Decomposition::new(
        series.clone(),
        trend,
        cycle,
        noise,
        vec![format!("detrend:friedman:{bass}")],
    )
}

/// Natural cubic smoothing spline on a unit-spaced grid with the penalty
/// chosen so the amplitude response is 0.5 at `cutoff_period` samples.
///
/// Uses the Reinsch formulation: solve `(R + lambda D D') c = D y` for the
/// second-derivative coefficients (D is the second-difference operator, R the
/// spline Gram matrix), then `mu = y - lambda D' c`.
pub(crate) fn smoothing_spline(y: &[f64], cutoff_period: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if n < 4 {
        return Err(Error::InsufficientData { len: n, min: 4 });
    }
    let lambda = spline_lambda(cutoff_period);

    let m = n - 2;
    // R + lambda D D' with R = tridiag(1/6, 2/3, 1/6) for unit spacing and
    // D D' = pentadiag(1, -4, 6, -4, 1).
    let diag = vec![2.0 / 3.0 + 6.0 * lambda; m];
    let off1 = vec![1.0 / 6.0 - 4.0 * lambda; m.saturating_sub(1)];
    let off2 = vec![lambda; m.saturating_sub(2)];
    let rhs: Vec<f64> = (0..m).map(|i| y[i] - 2.0 * y[i + 1] + y[i + 2]).collect();
    let c = solve_pentadiagonal(&diag, &off1, &off2, &rhs)?;

    // mu = y - lambda * D' c
    let mut mu = y.to_vec();
    for (i, &ci) in c.iter().enumerate() {
        mu[i] -= lambda * ci;
        mu[i + 1] += 2.0 * lambda * ci;
        mu[i + 2] -= lambda * ci;
    }
    Ok(mu)
}

/// Penalty weight with 50% amplitude response at the given period.
///
/// The discrete smoothing-spline filter has response
/// `1 / (1 + lambda * 12 (1 - cos w)^2 / (2 + cos w))` at angular frequency
/// `w`; solving for response 1/2 at `w = 2 pi / period` gives the weight.
fn spline_lambda(period: f64) -> f64 {
    let w = std::f64::consts::TAU / period.max(2.0);
    let c = w.cos();
    (c + 2.0) / (12.0 * (c - 1.0) * (c - 1.0))
}

// Span fractions of the supersmoother: tweeter, midrange, woofer.
const SPAN_FRACTIONS: [f64; 3] = [0.05, 0.2, 0.5];

/// Friedman-style variable-span smoother on a unit-spaced grid.
pub(crate) fn supersmoother(y: &[f64], bass: f64) -> Vec<f64> {
    let n = y.len();
    let spans: Vec<usize> = SPAN_FRACTIONS
        .iter()
        .map(|f| ((f * n as f64).round() as usize).clamp(3, n))
        .collect();

    // Pass 1: local linear smooth plus leave-one-out absolute residual for
    // each candidate span.
    let mut fits = Vec::with_capacity(3);
    let mut cv = Vec::with_capacity(3);
    for &span in &spans {
        let (fit, residual) = local_linear_with_cv(y, span);
        fits.push(fit);
        cv.push(residual);
    }

    // Pass 2: smooth the residuals with the midrange span, pick the best span
    // per point, optionally pushed toward the woofer by the bass control.
    let mid = spans[1];
    let cv_smooth: Vec<Vec<f64>> = cv
        .iter()
        .map(|r| {
            local_linear(r, mid)
                .into_iter()
                .map(|v| v.max(0.0))
                .collect()
        })
        .collect();
    let woofer = spans[2] as f64;
    let mut selected = vec![0.0; n];
    for i in 0..n {
        let mut best = 0;
        for j in 1..3 {
            if cv_smooth[j][i] < cv_smooth[best][i] {
                best = j;
            }
        }
        let mut span = spans[best] as f64;
        if bass > 0.0 && cv_smooth[2][i] > 0.0 {
            let ratio = (cv_smooth[best][i] / cv_smooth[2][i]).clamp(0.0, 1.0);
            span += (woofer - span) * ratio.powf(10.0 - bass);
        }
        selected[i] = span;
    }

    // Pass 3: smooth the span choice, interpolate between the bracketing
    // span fits, and polish with the tweeter span.
    let span_smooth = local_linear(&selected, mid);
    let mut blended = vec![0.0; n];
    for i in 0..n {
        let s = span_smooth[i].clamp(spans[0] as f64, spans[2] as f64);
        let (lo, hi) = if s <= spans[1] as f64 { (0, 1) } else { (1, 2) };
        let width = (spans[hi] - spans[lo]) as f64;
        let w = if width > 0.0 {
            (s - spans[lo] as f64) / width
        } else {
            0.0
        };
        blended[i] = (1.0 - w) * fits[lo][i] + w * fits[hi][i];
    }
    local_linear(&blended, spans[0])
}

// Running local linear fit over symmetric windows truncated at the edges.
fn local_linear(y: &[f64], span: usize) -> Vec<f64> {
    local_linear_with_cv(y, span).0
}

fn local_linear_with_cv(y: &[f64], span: usize) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let half = (span / 2).max(1);
    let mut fit = vec![0.0; n];
    let mut cv = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let count = (hi - lo + 1) as f64;
        let mut sx = 0.0;
        let mut sy = 0.0;
        for t in lo..=hi {
            sx += t as f64;
            sy += y[t];
        }
        let xbar = sx / count;
        let ybar = sy / count;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for t in lo..=hi {
            let dx = t as f64 - xbar;
            sxx += dx * dx;
            sxy += dx * (y[t] - ybar);
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let value = ybar + slope * (i as f64 - xbar);
        fit[i] = value;
        // leave-one-out residual through the hat-diagonal identity
        let leverage = 1.0 / count + (i as f64 - xbar).powi(2) / sxx.max(f64::MIN_POSITIVE);
        let denom = (1.0 - leverage).max(0.05);
        cv[i] = ((y[i] - value) / denom).abs();
    }
    (fit, cv)
}
