//! Cross-wavelet power and wavelet coherence for pairs of scalograms on a
//! shared grid.
//!
//! Cross power is the pointwise product `W_X conj(W_Y)`; its significance
//! threshold uses the quantile of `sqrt(chi2_2 * chi2_2)` for the product of
//! two independent complex-wavelet powers, `Z_2(0.95) = 3.999`, scaled by the
//! two AR(1) backgrounds. Coherence is the smoothed, normalized cross
//! spectrum with smoothing both in time (Gaussian of standard deviation equal
//! to the scale) and in scale (boxcar over 0.6 octaves); the shared smoothing
//! operator keeps the result inside [0, 1] by the Cauchy-Schwarz inequality.

use crate::error::{Error, Result};
use crate::rng::{gen_ar1, SeededStream};
use crate::wavelet::{cwt_morlet, fourier_period, Scalogram};
use num_complex::Complex64;

/// Quantiles of `sqrt(chi2_2 * chi2_2)`: cross-power significance constants
/// for two complex wavelet factors.
pub const Z2_95: f64 = 3.999;
pub const Z2_90: f64 = 3.2143;

/// Width of the scale-smoothing boxcar in octaves.
pub const SCALE_SMOOTH_OCTAVES: f64 = 0.6;

/// Cross-wavelet product of two scalograms.
#[derive(Debug, Clone)]
pub struct CrossScalogram {
    pub label_x: String,
    pub label_y: String,
    pub times: Vec<f64>,
    pub scales: Vec<f64>,
    pub omega0: f64,
    /// `W_X conj(W_Y)`, scale-major layout.
    pub cross: Vec<Vec<Complex64>>,
    /// `|W_X conj(W_Y)|`.
    pub power: Vec<Vec<f64>>,
    /// Phase angle of the cross product in (-pi, pi].
    pub phase: Vec<Vec<f64>>,
    pub sig90: Vec<Vec<bool>>,
    pub sig95: Vec<Vec<bool>>,
    /// Shared cone of influence (pointwise minimum of the two inputs).
    pub coi: Vec<f64>,
}

/// Squared wavelet coherence map.
#[derive(Debug, Clone)]
pub struct CoherenceMap {
    pub times: Vec<f64>,
    pub scales: Vec<f64>,
    pub omega0: f64,
    /// R^2 in [0, 1], scale-major layout.
    pub r2: Vec<Vec<f64>>,
    pub smoothing: SmoothSpec,
    pub coi: Vec<f64>,
}

/// Smoothing switches for coherence. Disabling both is rejected: without
/// smoothing the coherence of any pair is identically one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothSpec {
    pub time: bool,
    pub scale: bool,
}

impl Default for SmoothSpec {
    fn default() -> Self {
        SmoothSpec {
            time: true,
            scale: true,
        }
    }
}

fn check_grids(x: &Scalogram, y: &Scalogram) -> Result<()> {
    if !x.same_grid(y) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Pointwise cross-wavelet product with significance against the two AR(1)
/// backgrounds.
pub fn cross_wavelet(x: &Scalogram, y: &Scalogram) -> Result<CrossScalogram> {
    check_grids(x, y)?;
    let n_scales = x.n_scales();
    let n_times = x.n_times();
    let mut cross = Vec::with_capacity(n_scales);
    let mut power = Vec::with_capacity(n_scales);
    let mut phase = Vec::with_capacity(n_scales);
    let mut sig90 = Vec::with_capacity(n_scales);
    let mut sig95 = Vec::with_capacity(n_scales);
    let sigma = (x.variance * y.variance).sqrt();
    for j in 0..n_scales {
        let mut c_row = Vec::with_capacity(n_times);
        let mut p_row = Vec::with_capacity(n_times);
        let mut ph_row = Vec::with_capacity(n_times);
        let mut s90_row = Vec::with_capacity(n_times);
        let mut s95_row = Vec::with_capacity(n_times);
        let background = (x.background[j] * y.background[j]).sqrt();
        for t in 0..n_times {
            let c = x.coefficients[j][t] * y.coefficients[j][t].conj();
            let p = c.norm();
            c_row.push(c);
            p_row.push(p);
            ph_row.push(c.im.atan2(c.re));
            let ratio = p / sigma;
            s90_row.push(p > 0.0 && ratio > Z2_90 / 2.0 * background);
            s95_row.push(p > 0.0 && ratio > Z2_95 / 2.0 * background);
        }
        cross.push(c_row);
        power.push(p_row);
        phase.push(ph_row);
        sig90.push(s90_row);
        sig95.push(s95_row);
    }
    let coi: Vec<f64> = x
        .coi
        .iter()
        .zip(y.coi.iter())
        .map(|(&a, &b)| a.min(b))
        .collect();
    Ok(CrossScalogram {
        label_x: String::new(),
        label_y: String::new(),
        times: x.times.clone(),
        scales: x.grid.scales.clone(),
        omega0: x.omega0,
        cross,
        power,
        phase,
        sig90,
        sig95,
        coi,
    })
}

// Gaussian smoothing along time with standard deviation equal to the scale,
// normalized over the truncated window.
fn smooth_time<T>(row: &[T], scale: f64) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let n = row.len();
    let half = (4.0 * scale).ceil() as usize;
    let weights: Vec<f64> = (0..=half)
        .map(|d| (-0.5 * (d as f64 / scale).powi(2)).exp())
        .collect();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        let mut acc = T::default();
        let mut wsum = 0.0;
        for u in lo..=hi {
            let w = weights[t.abs_diff(u)];
            acc = acc + row[u] * w;
            wsum += w;
        }
        out.push(acc * (1.0 / wsum));
    }
    out
}

// Boxcar smoothing across scale rows spanning SCALE_SMOOTH_OCTAVES octaves,
// truncated at the grid edges.
fn smooth_scale<T>(field: &[Vec<T>], dj: f64) -> Vec<Vec<T>>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let n_scales = field.len();
    let half = ((SCALE_SMOOTH_OCTAVES / dj) / 2.0).round() as usize;
    let mut out = Vec::with_capacity(n_scales);
    for j in 0..n_scales {
        let lo = j.saturating_sub(half);
        let hi = (j + half).min(n_scales - 1);
        let count = (hi - lo + 1) as f64;
        let n_times = field[j].len();
        let mut row = Vec::with_capacity(n_times);
        for t in 0..n_times {
            let mut acc = T::default();
            for r in field.iter().take(hi + 1).skip(lo) {
                acc = acc + r[t];
            }
            row.push(acc * (1.0 / count));
        }
        out.push(row);
    }
    out
}

fn smooth_field<T>(field: &[Vec<T>], scales: &[f64], dj: f64, spec: SmoothSpec) -> Vec<Vec<T>>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let mut current: Vec<Vec<T>> = field.to_vec();
    if spec.scale {
        current = smooth_scale(&current, dj);
    }
    if spec.time {
        current = current
            .iter()
            .zip(scales.iter())
            .map(|(row, &s)| smooth_time(row, s))
            .collect();
    }
    current
}

/// Squared wavelet coherence
/// `R^2 = |S(W_XY / s)|^2 / (S(|W_X|^2 / s) S(|W_Y|^2 / s))`.
pub fn coherence(x: &Scalogram, y: &Scalogram, smooth: SmoothSpec) -> Result<CoherenceMap> {
    check_grids(x, y)?;
    if !smooth.time && !smooth.scale {
        return Err(Error::UnsmoothedCoherence);
    }
    let n_scales = x.n_scales();
    let n_times = x.n_times();
    let scales = &x.grid.scales;
    let mut cross_scaled = Vec::with_capacity(n_scales);
    let mut px_scaled = Vec::with_capacity(n_scales);
    let mut py_scaled = Vec::with_capacity(n_scales);
    for j in 0..n_scales {
        let s = scales[j];
        let mut c_row = Vec::with_capacity(n_times);
        let mut x_row = Vec::with_capacity(n_times);
        let mut y_row = Vec::with_capacity(n_times);
        for t in 0..n_times {
            c_row.push(x.coefficients[j][t] * y.coefficients[j][t].conj() * (1.0 / s));
            x_row.push(x.coefficients[j][t].norm_sqr() / s);
            y_row.push(y.coefficients[j][t].norm_sqr() / s);
        }
        cross_scaled.push(c_row);
        px_scaled.push(x_row);
        py_scaled.push(y_row);
    }
    let num = smooth_field(&cross_scaled, scales, x.grid.dj, smooth);
    let den_x = smooth_field(&px_scaled, scales, x.grid.dj, smooth);
    let den_y = smooth_field(&py_scaled, scales, x.grid.dj, smooth);
    let mut r2 = Vec::with_capacity(n_scales);
    for j in 0..n_scales {
        let mut row = Vec::with_capacity(n_times);
        for t in 0..n_times {
            let den = den_x[j][t] * den_y[j][t];
            row.push(if den > 0.0 {
                num[j][t].norm_sqr() / den
            } else {
                0.0
            });
        }
        r2.push(row);
    }
    let coi: Vec<f64> = x
        .coi
        .iter()
        .zip(y.coi.iter())
        .map(|(&a, &b)| a.min(b))
        .collect();
    Ok(CoherenceMap {
        times: x.times.clone(),
        scales: scales.clone(),
        omega0: x.omega0,
        r2,
        smoothing: smooth,
        coi,
    })
}

/// Copy of a cross scalogram with power, coefficients and significance masks
/// zeroed at scales whose Fourier period exceeds `cutoff_period` years.
pub fn dump_lowfreq_mask(c: &CrossScalogram, cutoff_period: f64) -> CrossScalogram {
    let mut out = c.clone();
    for (j, &s) in c.scales.iter().enumerate() {
        if fourier_period(s, c.omega0) > cutoff_period {
            for t in 0..c.times.len() {
                out.cross[j][t] = Complex64::new(0.0, 0.0);
                out.power[j][t] = 0.0;
                out.sig90[j][t] = false;
                out.sig95[j][t] = false;
            }
        }
    }
    out
}

/// Pointwise 95% thresholds of squared coherence under the null of two
/// independent AR(1) processes with the given persistences, estimated from
/// `n_surrogates` seeded surrogate pairs.
pub fn coherence_significance(
    n: usize,
    alpha_x: f64,
    alpha_y: f64,
    grid: &crate::wavelet::ScaleGrid,
    omega0: f64,
    smooth: SmoothSpec,
    n_surrogates: usize,
    p: f64,
    stream: &mut SeededStream,
) -> Result<Vec<Vec<f64>>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!(
            "probability must be in (0,1), got {p}"
        )));
    }
    if n_surrogates < 10 {
        return Err(Error::Parameter("need at least 10 surrogate pairs".into()));
    }
    let n_scales = grid.n_scales();
    let mut samples: Vec<Vec<Vec<f64>>> = vec![vec![Vec::with_capacity(n_surrogates); n]; n_scales];
    for _ in 0..n_surrogates {
        let a = gen_ar1(n, alpha_x, 1.0, stream)?;
        let b = gen_ar1(n, alpha_y, 1.0, stream)?;
        let sa = cwt_morlet(&a, grid, omega0)?;
        let sb = cwt_morlet(&b, grid, omega0)?;
        let map = coherence(&sa, &sb, smooth)?;
        for j in 0..n_scales {
            for t in 0..n {
                samples[j][t].push(map.r2[j][t]);
            }
        }
    }
    let mut thresholds = Vec::with_capacity(n_scales);
    for row in samples.iter_mut() {
        let mut out = Vec::with_capacity(n);
        for cell in row.iter_mut() {
            cell.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let idx = ((cell.len() as f64) * p) as usize;
            out.push(cell[idx.min(cell.len() - 1)]);
        }
        thresholds.push(out);
    }
    Ok(thresholds)
}
