//! Empirical mode decomposition by envelope sifting.
//!
//! Each intrinsic mode function (IMF) is extracted by repeatedly subtracting
//! the mean of the cubic-spline envelopes through the local maxima and minima
//! until the relative change between consecutive sift iterates,
//! `sum_t ((h_new - h_old) / h_old)^2`, drops below the tolerance. Envelope
//! end conditions mirror the two nearest extrema across each boundary before
//! spline fitting. Extraction stops when the residual is monotone, has fewer
//! than four extrema, or the IMF budget is exhausted; the telescoping
//! subtraction makes the decomposition complete by construction.

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::linalg::CubicSpline;
use crate::series::Decomposition;
use crate::spectral::{c_dft, c_idft};
use num_complex::Complex64;

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_MAX_IMFS: usize = 10;
pub const DEFAULT_MAX_SIFTS: usize = 50;

/// Ordered intrinsic mode functions plus the final residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    /// Sift iterations spent on each IMF.
    pub sift_counts: Vec<usize>,
    pub epsilon: f64,
}

impl ImfSet {
    pub fn n_imfs(&self) -> usize {
        self.imfs.len()
    }

    /// Sum of all IMFs plus the residual; equals the input up to rounding.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf.iter()) {
                *o += v;
            }
        }
        out
    }
}

/// Instantaneous amplitude and frequency of one IMF.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpectrum {
    /// Envelope amplitude, nonnegative.
    pub amplitude: Vec<f64>,
    /// Instantaneous frequency in cycles per sample; NaN where the amplitude
    /// vanishes and the phase is undefined.
    pub frequency: Vec<f64>,
    /// Set when the input grossly violates the IMF envelope-mean property.
    pub non_imf_warning: bool,
}

/// Strict local maxima and minima with plateaus collapsed to their midpoint.
fn find_extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = x.len();
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if n < 3 {
        return (maxima, minima);
    }
    let mut i = 1;
    while i < n - 1 {
        if x[i] > x[i - 1] {
            // climb; find the end of any plateau at the top
            let start = i;
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[j] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[j] {
                maxima.push((start + j) / 2);
            }
            i = j + 1;
        } else if x[i] < x[i - 1] {
            let start = i;
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[j] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] > x[j] {
                minima.push((start + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    (maxima, minima)
}

fn is_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0]) || x.windows(2).all(|w| w[1] <= w[0])
}

// Envelope through the given extrema, with the two nearest extrema mirrored
// across each boundary. Needs at least one extremum.
fn envelope(x: &[f64], extrema: &[usize]) -> Vec<f64> {
    let n = x.len();
    let last = (n - 1) as f64;
    let mut xs: Vec<f64> = Vec::with_capacity(extrema.len() + 4);
    let mut ys: Vec<f64> = Vec::with_capacity(extrema.len() + 4);

    // left mirror: reflect across t = 0
    let take = extrema.len().min(2);
    for &e in extrema[..take].iter().rev() {
        let mirrored = -(e as f64);
        if mirrored < -1e-9 || (e == 0 && xs.is_empty()) {
            xs.push(mirrored);
            ys.push(x[e]);
        }
    }
    for &e in extrema {
        xs.push(e as f64);
        ys.push(x[e]);
    }
    // right mirror: reflect across t = n-1
    for &e in extrema.iter().rev().take(2.min(extrema.len())) {
        let mirrored = 2.0 * last - e as f64;
        if mirrored > last + 1e-9 {
            xs.push(mirrored);
            ys.push(x[e]);
        }
    }
    // drop any accidental duplicates from mirroring an extremum at the edge
    let mut keep_x: Vec<f64> = Vec::with_capacity(xs.len());
    let mut keep_y: Vec<f64> = Vec::with_capacity(xs.len());
    for (&xv, &yv) in xs.iter().zip(ys.iter()) {
        if keep_x.last().map_or(true, |&prev| xv > prev + 1e-9) {
            keep_x.push(xv);
            keep_y.push(yv);
        }
    }
    if keep_x.len() < 2 {
        return vec![x[extrema[0]]; n];
    }
    let spline = CubicSpline::fit(&keep_x, &keep_y);
    (0..n).map(|t| spline.eval(t as f64)).collect()
}

// One envelope-mean subtraction; None when there are not enough extrema on
// both sides to build envelopes.
fn sift_once(h: &[f64]) -> Option<Vec<f64>> {
    let (maxima, minima) = find_extrema(h);
    if maxima.is_empty() || minima.is_empty() || maxima.len() + minima.len() < 4 {
        return None;
    }
    let upper = envelope(h, &maxima);
    let lower = envelope(h, &minima);
    Some(
        h.iter()
            .enumerate()
            .map(|(t, &v)| v - 0.5 * (upper[t] + lower[t]))
            .collect(),
    )
}

/// Decompose `signal` into IMFs by sifting.
///
/// Inputs with fewer than four extrema come back unchanged as the residual
/// with zero IMFs; that is a valid decomposition, not an error.
pub fn sift(signal: &[f64], epsilon: f64, max_imfs: usize, max_sifts: usize) -> Result<ImfSet> {
    let n = signal.len();
    if n < 16 {
        return Err(Error::InsufficientData { len: n, min: 16 });
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be in (0,1), got {epsilon}"
        )));
    }

    let mut residual = signal.to_vec();
    let mut imfs = Vec::new();
    let mut sift_counts = Vec::new();

    while imfs.len() < max_imfs {
        let (maxima, minima) = find_extrema(&residual);
        if maxima.len() + minima.len() < 4 || is_monotone(&residual) {
            break;
        }
        let mut h = residual.clone();
        let mut count = 0usize;
        loop {
            let Some(h_new) = sift_once(&h) else { break };
            count += 1;
            if count >= max_sifts {
                h = h_new;
                break;
            }
            let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let floor = 1e-12 * scale;
            let mut sd = 0.0;
            for (old, new) in h.iter().zip(h_new.iter()) {
                if old.abs() >= floor && floor > 0.0 {
                    let rel = (new - old) / old;
                    sd += rel * rel;
                }
            }
            h = h_new;
            if sd < epsilon {
                break;
            }
        }
        if count == 0 {
            break;
        }
        for (r, v) in residual.iter_mut().zip(h.iter()) {
            *r -= v;
        }
        imfs.push(h);
        sift_counts.push(count);
    }

    Ok(ImfSet {
        imfs,
        residual,
        sift_counts,
        epsilon,
    })
}

/// Treat the first IMF as noise: `noise = IMF1`, `cycle = signal - IMF1`,
/// zero trend. A signal without extrema passes through untouched.
pub fn denoise_first_imf(series: &AnnualSeries, epsilon: f64) -> Result<Decomposition> {
    let set = sift(
        series.values(),
        epsilon,
        DEFAULT_MAX_IMFS,
        DEFAULT_MAX_SIFTS,
    )?;
    let n = series.len();
    let noise = if set.imfs.is_empty() {
        vec![0.0; n]
    } else {
        set.imfs[0].clone()
    };
    let cycle: Vec<f64> = series
        .values()
        .iter()
        .zip(noise.iter())
        .map(|(x, v)| x - v)
        .collect();
    Decomposition::new(
        series.clone(),
        vec![0.0; n],
        cycle,
        noise,
        vec![format!("denoise:emd:{epsilon}")],
    )
}

/// Amplitude and instantaneous frequency of an IMF via the analytic signal
/// (negative frequencies zeroed, positive doubled) and a centered difference
/// of the unwrapped phase.
pub fn hilbert_spectrum(imf: &[f64]) -> Result<HilbertSpectrum> {
    let n = imf.len();
    if n < 16 {
        return Err(Error::InsufficientData { len: n, min: 16 });
    }
    if imf.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    // gross envelope-mean check: an IMF oscillates around zero
    let sd = {
        let mean = imf.iter().sum::<f64>() / n as f64;
        (imf.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let mean_abs = (imf.iter().sum::<f64>() / n as f64).abs();
    let non_imf_warning = sd > 0.0 && mean_abs > 0.5 * sd;

    // analytic signal
    let mut spectrum = c_dft(
        &imf.iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect::<Vec<_>>(),
    );
    let half = n / 2;
    for (k, c) in spectrum.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist stay
        } else if k < half || (n % 2 == 1 && k <= half) {
            *c *= 2.0;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let analytic = c_idft(&spectrum);

    let amplitude: Vec<f64> = analytic.iter().map(|z| z.norm()).collect();
    let max_amp = amplitude.iter().fold(0.0f64, |m, &v| m.max(v));

    // unwrapped phase
    let mut phase = Vec::with_capacity(n);
    let mut prev = 0.0f64;
    let mut offset = 0.0f64;
    for (t, z) in analytic.iter().enumerate() {
        let raw = z.im.atan2(z.re);
        if t > 0 {
            let mut delta = raw + offset - prev;
            while delta > std::f64::consts::PI {
                offset -= std::f64::consts::TAU;
                delta -= std::f64::consts::TAU;
            }
            while delta < -std::f64::consts::PI {
                offset += std::f64::consts::TAU;
                delta += std::f64::consts::TAU;
            }
        }
        prev = raw + offset;
        phase.push(prev);
    }

    let defined = |t: usize| max_amp > 0.0 && amplitude[t] > 1e-12 * max_amp;
    let mut frequency = vec![f64::NAN; n];
    for t in 0..n {
        if !defined(t) {
            continue;
        }
        frequency[t] = if t == 0 {
            (phase[1] - phase[0]) / std::f64::consts::TAU
        } else if t == n - 1 {
            (phase[n - 1] - phase[n - 2]) / std::f64::consts::TAU
        } else {
            (phase[t + 1] - phase[t - 1]) / (2.0 * std::f64::consts::TAU)
        };
    }

    Ok(HilbertSpectrum {
        amplitude,
        frequency,
        non_imf_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededStream;

    fn count_zero_crossings(x: &[f64]) -> usize {
        let mut count = 0;
        let mut prev: Option<bool> = None;
        for &v in x {
            if v == 0.0 {
                continue;
            }
            let sign = v > 0.0;
            if let Some(p) = prev {
                if p != sign {
                    count += 1;
                }
            }
            prev = Some(sign);
        }
        count
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            num += (x - ma) * (y - mb);
            da += (x - ma).powi(2);
            db += (y - mb).powi(2);
        }
        num / (da * db).sqrt()
    }

    fn two_tone(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let fast: Vec<f64> = (0..n)
            .map(|t| (std::f64::consts::TAU * t as f64 / 5.0).sin())
            .collect();
        let slow: Vec<f64> = (0..n)
            .map(|t| (std::f64::consts::TAU * t as f64 / 40.0).sin())
            .collect();
        let sum: Vec<f64> = fast.iter().zip(slow.iter()).map(|(a, b)| a + b).collect();
        (sum, fast, slow)
    }

    #[test]
    fn monotone_ramp_yields_no_imfs() {
        let ramp: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let set = sift(&ramp, 0.05, 10, 50).unwrap();
        assert_eq!(set.n_imfs(), 0);
        assert_eq!(set.residual, ramp);
    }

    #[test]
    fn two_tone_separation() {
        let (sum, fast, slow) = two_tone(400);
        let set = sift(&sum, 0.05, 10, 50).unwrap();
        assert!(set.n_imfs() >= 2, "got {} IMFs", set.n_imfs());
        let r1 = correlation(&set.imfs[0], &fast);
        let r2 = correlation(&set.imfs[1], &slow);
        assert!(r1 > 0.95, "IMF1 vs fast tone: r = {r1}");
        assert!(r2 > 0.9, "IMF2 vs slow tone: r = {r2}");
    }

    #[test]
    fn completeness_on_random_input() {
        let mut s = SeededStream::new(41);
        for _ in 0..10 {
            let x: Vec<f64> = (0..256).map(|_| s.next_normal()).collect();
            let set = sift(&x, 0.05, 10, 50).unwrap();
            let rec = set.reconstruct();
            let max_err = rec
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err < 1e-9, "max reconstruction error {max_err}");
        }
    }

    #[test]
    fn imf_extrema_zero_crossing_property() {
        let (sum, _, _) = two_tone(400);
        let set = sift(&sum, 0.05, 10, 50).unwrap();
        for (j, imf) in set.imfs.iter().enumerate() {
            let (maxima, minima) = find_extrema(imf);
            let extrema = maxima.len() + minima.len();
            let crossings = count_zero_crossings(imf);
            assert!(
                (extrema as i64 - crossings as i64).abs() <= 1,
                "IMF{}: {} extrema vs {} crossings",
                j + 1,
                extrema,
                crossings
            );
        }
    }

    #[test]
    fn sift_is_deterministic() {
        let (sum, _, _) = two_tone(200);
        let a = sift(&sum, 0.05, 10, 50).unwrap();
        let b = sift(&sum, 0.05, 10, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sift_rejects_bad_input() {
        assert!(sift(&[1.0; 8], 0.05, 10, 50).is_err());
        assert!(sift(&vec![0.0; 32], 1.5, 10, 50).is_err());
        let mut x = vec![0.0; 32];
        x[5] = f64::NAN;
        assert!(sift(&x, 0.05, 10, 50).is_err());
    }

    fn annual(values: Vec<f64>) -> AnnualSeries {
        AnnualSeries::new(1967, values, "t", "").unwrap()
    }

    #[test]
    fn denoise_passthrough_without_extrema() {
        let ramp: Vec<f64> = (0..32).map(|i| i as f64 * 0.5).collect();
        let d = denoise_first_imf(&annual(ramp.clone()), 0.05).unwrap();
        assert!(d.noise().iter().all(|&v| v == 0.0));
        assert_eq!(d.cycle(), &ramp[..]);
    }

    #[test]
    fn denoise_keeps_slow_tone() {
        let (sum, _, slow) = two_tone(400);
        let d = denoise_first_imf(&annual(sum), 0.05).unwrap();
        let r = correlation(d.cycle(), &slow);
        assert!(r > 0.9, "cycle vs slow tone: r = {r}");
    }

    #[test]
    fn denoise_reduces_white_noise_variance() {
        let mut s = SeededStream::new(42);
        let mut reduced = 0usize;
        let draws = 100;
        for _ in 0..draws {
            let x: Vec<f64> = (0..512).map(|_| s.next_normal()).collect();
            let d = denoise_first_imf(&annual(x.clone()), 0.05).unwrap();
            let var = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|u| (u - m).powi(2)).sum::<f64>() / v.len() as f64
            };
            if var(d.cycle()) < var(&x) {
                reduced += 1;
            }
        }
        assert!(
            reduced >= 95,
            "variance reduced in only {reduced}/{draws} draws"
        );
    }

    #[test]
    fn hilbert_recovers_cosine_frequency_and_amplitude() {
        let n = 512;
        let x: Vec<f64> = (0..n)
            .map(|t| (std::f64::consts::TAU * t as f64 / 10.0).cos())
            .collect();
        let h = hilbert_spectrum(&x).unwrap();
        for t in 32..(n - 32) {
            assert!(
                (h.frequency[t] - 0.1).abs() < 0.005,
                "freq[{t}] = {}",
                h.frequency[t]
            );
            assert!(
                (h.amplitude[t] - 1.0).abs() < 0.02,
                "amp[{t}] = {}",
                h.amplitude[t]
            );
        }
        assert!(!h.non_imf_warning);
    }

    #[test]
    fn hilbert_tracks_amplitude_modulation() {
        let n = 512;
        let modulator: Vec<f64> = (0..n)
            .map(|t| 1.0 + 0.3 * (std::f64::consts::TAU * t as f64 / 100.0).cos())
            .collect();
        let x: Vec<f64> = (0..n)
            .map(|t| modulator[t] * (std::f64::consts::TAU * t as f64 / 10.0).cos())
            .collect();
        let h = hilbert_spectrum(&x).unwrap();
        let interior = 32..(n - 32);
        let got: Vec<f64> = interior.clone().map(|t| h.amplitude[t]).collect();
        let want: Vec<f64> = interior.map(|t| modulator[t]).collect();
        let r = correlation(&got, &want);
        assert!(r > 0.95, "amplitude vs modulator: r = {r}");
    }

    #[test]
    fn hilbert_zero_vector_flags_undefined_frequency() {
        let h = hilbert_spectrum(&vec![0.0; 64]).unwrap();
        assert!(h.amplitude.iter().all(|&a| a == 0.0));
        assert!(h.frequency.iter().all(|f| f.is_nan()));
    }

    #[test]
    fn mean_frequency_decreases_with_imf_index() {
        // median over draws of the per-draw "frequencies decrease" indicator
        let mut s = SeededStream::new(43);
        let mut ok = 0usize;
        let draws = 20;
        for _ in 0..draws {
            let x: Vec<f64> = (0..512).map(|_| s.next_normal()).collect();
            let set = sift(&x, 0.05, 10, 50).unwrap();
            let mut freqs = Vec::new();
            for imf in &set.imfs {
                if let Ok(h) = hilbert_spectrum(imf) {
                    let vals: Vec<f64> = h
                        .frequency
                        .iter()
                        .cloned()
                        .filter(|f| f.is_finite())
                        .collect();
                    if !vals.is_empty() {
                        freqs.push(vals.iter().sum::<f64>() / vals.len() as f64);
                    }
                }
            }
            if freqs.windows(2).all(|w| w[1] <= w[0] + 0.02) {
                ok += 1;
            }
        }
        assert!(
            ok > draws / 2,
            "monotone mean frequency in only {ok}/{draws} draws"
        );
    }
}
