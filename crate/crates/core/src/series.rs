//! Series algebra: the additive trend/cycle/noise container, normalization
//! and the autocorrelation function.

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;

/// Tolerance for the additive-closure invariant of [`Decomposition`].
pub const CLOSURE_TOL: f64 = 1e-9;

/// Additive decomposition `x_i = trend_i + cycle_i + noise_i` of a source
/// series, together with tags naming the methods that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    source: AnnualSeries,
    trend: Vec<f64>,
    cycle: Vec<f64>,
    noise: Vec<f64>,
    pub method_tags: Vec<String>,
}

/// One of the three additive components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Trend,
    Cycle,
    Noise,
}

impl Decomposition {
    /// Build a decomposition, checking lengths and the per-point closure
    /// `trend + cycle + noise = source` within [`CLOSURE_TOL`].
    pub fn new(
        source: AnnualSeries,
        trend: Vec<f64>,
        cycle: Vec<f64>,
        noise: Vec<f64>,
        method_tags: Vec<String>,
    ) -> Result<Self> {
        let n = source.len();
        if trend.len() != n || cycle.len() != n || noise.len() != n {
            return Err(Error::Parameter(
                "component lengths differ from source".into(),
            ));
        }
        for i in 0..n {
            let sum = trend[i] + cycle[i] + noise[i];
            if (sum - source.values()[i]).abs() > CLOSURE_TOL {
                return Err(Error::Parameter(format!(
                    "additive closure violated at index {i}"
                )));
            }
        }
        Ok(Decomposition {
            source,
            trend,
            cycle,
            noise,
            method_tags,
        })
    }

    pub fn source(&self) -> &AnnualSeries {
        &self.source
    }

    pub fn trend(&self) -> &[f64] {
        &self.trend
    }

    pub fn cycle(&self) -> &[f64] {
        &self.cycle
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }
}

/// Pointwise sum of the selected components.
pub fn recombine(d: &Decomposition, parts: &[Part]) -> Result<Vec<f64>> {
    if parts.is_empty() {
        return Err(Error::Parameter("recombine needs at least one part".into()));
    }
    let n = d.source.len();
    let mut out = vec![0.0; n];
    for part in parts {
        let component = match part {
            Part::Trend => &d.trend,
            Part::Cycle => &d.cycle,
            Part::Noise => &d.noise,
        };
        for (o, &v) in out.iter_mut().zip(component.iter()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Autocorrelation profile over lags 0..=max_lag.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfProfile {
    pub lags: Vec<usize>,
    pub rho: Vec<f64>,
}

/// Sample autocorrelation with the biased estimator: the denominator is the
/// full-series sum of squares, which keeps every |rho_k| <= 1.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfProfile> {
    let n = series.len();
    if max_lag >= n {
        return Err(Error::Parameter(format!(
            "max_lag {max_lag} must be < length {n}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let mut lags = Vec::with_capacity(max_lag + 1);
    let mut rho = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let num: f64 = (0..n - k).map(|t| centered[t] * centered[t + k]).sum();
        lags.push(k);
        rho.push(num / denom);
    }
    Ok(AcfProfile { lags, rho })
}

/// Shift and scale to zero mean and unit sample standard deviation
/// (N-1 divisor).
pub fn standardize(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { len: n, min: 2 });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let ss: f64 = series.iter().map(|v| (v - mean).powi(2)).sum();
    if ss <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    Ok(series.iter().map(|v| (v - mean) / sd).collect())
}
