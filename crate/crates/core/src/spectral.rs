//! Fourier machinery, periodograms, the AR(1) red-noise background and
//! chi-square quantiles.
//!
//! The transform is the exact N-point DFT with the e^{-i 2 pi k n / N}
//! convention. Powers of two go through an in-place radix-2 kernel; every
//! other length goes through Bluestein's chirp-z algorithm, which re-expresses
//! the DFT as a convolution evaluated with zero-padded radix-2 transforms, so
//! all lengths share the same fast path.

use crate::error::{Error, Result};
use crate::special;
use num_complex::Complex64;

/// Forward DFT of a real signal: `F_k = sum_n x_n e^{-i 2 pi k n / N}`.
pub fn dft(signal: &[f64]) -> Vec<Complex64> {
    let x: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    c_dft(&x)
}

/// Forward DFT of a complex signal.
pub fn c_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    if n.is_power_of_two() {
        let mut buf = x.to_vec();
        fft_pow2(&mut buf, false);
        buf
    } else {
        bluestein(x)
    }
}

/// Inverse DFT, normalized by 1/N.
pub fn c_idft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    let mut buf: Vec<Complex64> = if n.is_power_of_two() {
        let mut b = x.to_vec();
        fft_pow2(&mut b, true);
        b
    } else {
        let conj: Vec<Complex64> = x.iter().map(|v| v.conj()).collect();
        bluestein(&conj).iter().map(|v| v.conj()).collect()
    };
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    buf
}

// In-place iterative radix-2 Cooley-Tukey. `inverse` flips the twiddle sign
// only; the caller applies 1/N.
fn fft_pow2(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * std::f64::consts::TAU / len as f64;
        let wlen = Complex64::from_polar(1.0, ang);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for i in 0..len / 2 {
                let u = buf[start + i];
                let v = buf[start + i + len / 2] * w;
                buf[start + i] = u + v;
                buf[start + i + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

// Chirp-z DFT for arbitrary N on top of the radix-2 kernel.
fn bluestein(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();
    // chirp_k = e^{-i pi k^2 / n}; k^2 taken mod 2n to keep the angle exact
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let sq = ((k as u64 * k as u64) % (2 * n as u64)) as f64;
            Complex64::from_polar(1.0, -std::f64::consts::PI * sq / n as f64)
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = x[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let v = chirp[k].conj();
        b[k] = v;
        b[m - k] = v;
    }
    fft_pow2(&mut a, false);
    fft_pow2(&mut b, false);
    for (av, bv) in a.iter_mut().zip(b.iter()) {
        *av *= *bv;
    }
    fft_pow2(&mut a, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}

/// One-sided power spectrum of a mean-removed signal.
#[derive(Debug, Clone)]
pub struct Periodogram {
    /// Frequencies in cycles per sample, in (0, 0.5].
    pub frequencies: Vec<f64>,
    /// Power `|F_k|^2 / N` at each frequency.
    pub power: Vec<f64>,
    /// Original series length.
    pub n: usize,
}

impl Periodogram {
    /// Periods (1/frequency) in samples; same order as `frequencies`.
    pub fn periods(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| 1.0 / f).collect()
    }
}

/// Periodogram of `signal`; the mean is removed internally. With the
/// normalization used here Parseval's identity reads
/// `sum_k power_k * w_k = sum_t (x_t - mean)^2`, where `w_k` is 2 except at
/// the Nyquist bin of an even-length series.
pub fn periodogram(signal: &[f64]) -> Result<Periodogram> {
    let n = signal.len();
    if n < 8 {
        return Err(Error::InsufficientData { len: n, min: 8 });
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let coeffs = dft(&centered);
    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for k in 1..=half {
        frequencies.push(k as f64 / n as f64);
        power.push(coeffs[k].norm_sqr() / n as f64);
    }
    Ok(Periodogram {
        frequencies,
        power,
        n,
    })
}

/// Fitted AR(1) noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Model {
    /// Lag-1 persistence, clamped to [0, 0.999].
    pub alpha: f64,
    /// Innovation variance.
    pub sigma2: f64,
    /// True when the raw lag-1 autocorrelation fell outside [0, 0.999].
    pub clamped: bool,
}

/// Estimate an AR(1) model from the lag-1 autocorrelation of the mean-removed
/// series. Negative estimates are clamped to zero (white noise) and flagged.
pub fn fit_ar1(signal: &[f64]) -> Result<Ar1Model> {
    let n = signal.len();
    if n < 20 {
        return Err(Error::InsufficientData { len: n, min: 20 });
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let num: f64 = centered.windows(2).map(|w| w[0] * w[1]).sum();
    let raw = num / denom;
    let alpha = raw.clamp(0.0, 0.999);
    let variance = denom / n as f64;
    Ok(Ar1Model {
        alpha,
        sigma2: variance * (1.0 - alpha * alpha),
        clamped: raw != alpha,
    })
}

/// Normalized AR(1) spectrum `P(f) = (1 - a^2) / |1 - a e^{-i 2 pi f}|^2` at a
/// frequency in cycles per sample. The closed form integrates to unit mean
/// over f in [0, 0.5], so no further normalization is applied.
pub fn ar1_spectrum(model: &Ar1Model, frequency: f64) -> f64 {
    let a = model.alpha;
    (1.0 - a * a) / (1.0 + a * a - 2.0 * a * (std::f64::consts::TAU * frequency).cos())
}

/// Quantile of the chi-square distribution with `m` degrees of freedom:
/// the x with `CDF(x) = p`.
pub fn chi2_quantile(p: f64, m: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!(
            "probability must be in (0,1), got {p}"
        )));
    }
    if m == 0 {
        return Err(Error::Parameter(
            "degrees of freedom must be positive".into(),
        ));
    }
    Ok(2.0 * special::gamma_p_inv(m as f64 / 2.0, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededStream;

    // Independent O(N^2) oracle for the transform tests.
    fn direct_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -std::f64::consts::TAU * k as f64 * t as f64 / n as f64;
                    acc += Complex64::from_polar(v, ang);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn dft_of_impulse_is_all_ones() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        for c in dft(&x) {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_of_constant_concentrates_at_dc() {
        for &n in &[8usize, 12, 17] {
            let x = vec![3.0; n];
            let f = dft(&x);
            assert!((f[0] - Complex64::new(3.0 * n as f64, 0.0)).norm() < 1e-10);
            for c in &f[1..] {
                assert!(c.norm() < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn fast_path_matches_direct_sum() {
        let mut s = SeededStream::new(11);
        for &n in &[64usize, 37, 100, 128] {
            let x: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
            let fast = dft(&x);
            let slow = direct_dft(&x);
            let max_diff = fast
                .iter()
                .zip(slow.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(max_diff < 1e-9, "n = {n}, diff = {max_diff}");
        }
    }

    #[test]
    fn idft_inverts_dft() {
        let mut s = SeededStream::new(12);
        for &n in &[32usize, 51] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(s.next_normal(), s.next_normal()))
                .collect();
            let back = c_idft(&c_dft(&x));
            for (a, b) in back.iter().zip(x.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dft_linearity() {
        let mut s = SeededStream::new(13);
        let n = 48;
        let x: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
        let y: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
        let combo: Vec<f64> = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| 2.5 * a - 1.25 * b)
            .collect();
        let fc = dft(&combo);
        let fx = dft(&x);
        let fy = dft(&y);
        for k in 0..n {
            let want = 2.5 * fx[k] - 1.25 * fy[k];
            assert!((fc[k] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn periodogram_finds_single_tone() {
        let n = 64;
        let x: Vec<f64> = (0..n)
            .map(|t| (std::f64::consts::TAU * t as f64 * 8.0 / 64.0).cos())
            .collect();
        let p = periodogram(&x).unwrap();
        let peak_idx = p
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((p.frequencies[peak_idx] - 8.0 / 64.0).abs() < 1e-12);
        for (i, &pw) in p.power.iter().enumerate() {
            if i != peak_idx {
                assert!(p.power[peak_idx] >= 100.0 * pw);
            }
        }
    }

    #[test]
    fn periodogram_of_white_noise_is_flat() {
        // No bin dominates: max < 10x the mean bin in at least 90% of draws.
        // For ~2047 exponential bins P(max < 10 mean) ~ exp(-2047 e^-10) ~
        // 0.91; a 10x-median rule would fail ~87% of the time since the
        // expected max is already ~11x the median.
        let mut s = SeededStream::new(17);
        let draws = 100;
        let mut flat = 0usize;
        for _ in 0..draws {
            let x: Vec<f64> = (0..4096).map(|_| s.next_normal()).collect();
            let p = periodogram(&x).unwrap();
            let mean = p.power.iter().sum::<f64>() / p.power.len() as f64;
            let max = p.power.iter().cloned().fold(0.0f64, f64::max);
            if max < 10.0 * mean {
                flat += 1;
            }
        }
        assert!(flat >= 90, "flat spectrum in only {flat}/{draws} draws");
    }

    #[test]
    fn periodogram_satisfies_parseval() {
        let mut s = SeededStream::new(14);
        for &n in &[64usize, 101] {
            let x: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
            let p = periodogram(&x).unwrap();
            let mean = x.iter().sum::<f64>() / n as f64;
            let energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
            let mut total = 0.0;
            for (k, &pw) in p.power.iter().enumerate() {
                let is_nyquist = n % 2 == 0 && k == p.power.len() - 1;
                total += pw * if is_nyquist { 1.0 } else { 2.0 };
            }
            assert!((total - energy).abs() / energy < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn fit_ar1_white_noise_is_near_zero() {
        let mut s = SeededStream::new(15);
        let x = crate::rng::gen_ar1(10_000, 0.0, 1.0, &mut s).unwrap();
        let m = fit_ar1(&x).unwrap();
        assert!(m.alpha < 0.03, "alpha = {}", m.alpha);
    }

    #[test]
    fn fit_ar1_recovers_persistence() {
        let mut s = SeededStream::new(16);
        let x = crate::rng::gen_ar1(10_000, 0.7, 1.0, &mut s).unwrap();
        let m = fit_ar1(&x).unwrap();
        assert!((m.alpha - 0.7).abs() < 0.02, "alpha = {}", m.alpha);
        assert!(!m.clamped);
    }

    #[test]
    fn fit_ar1_clamps_negative_correlation() {
        let x: Vec<f64> = (0..64)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let m = fit_ar1(&x).unwrap();
        assert_eq!(m.alpha, 0.0);
        assert!(m.clamped);
    }

    #[test]
    fn ar1_spectrum_white_noise_is_flat() {
        let m = Ar1Model {
            alpha: 0.0,
            sigma2: 1.0,
            clamped: false,
        };
        for &f in &[0.0, 0.1, 0.25, 0.5] {
            assert!((ar1_spectrum(&m, f) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ar1_spectrum_low_high_ratio() {
        let m = Ar1Model {
            alpha: 0.7,
            sigma2: 1.0,
            clamped: false,
        };
        let ratio = ar1_spectrum(&m, 0.0) / ar1_spectrum(&m, 0.5);
        let want = (1.7f64 / 0.3).powi(2);
        assert!((ratio - want).abs() < 1e-10);
    }

    #[test]
    fn ar1_spectrum_has_unit_mean() {
        let m = Ar1Model {
            alpha: 0.7,
            sigma2: 1.0,
            clamped: false,
        };
        let k = 100_000;
        let mean: f64 = (0..k)
            .map(|i| ar1_spectrum(&m, (i as f64 + 0.5) / (2.0 * k as f64)))
            .sum::<f64>()
            / k as f64;
        assert!((mean - 1.0).abs() < 1e-3, "mean = {mean}");
    }

    #[test]
    fn ar1_spectrum_monotone_decreasing() {
        let m = Ar1Model {
            alpha: 0.5,
            sigma2: 1.0,
            clamped: false,
        };
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let v = ar1_spectrum(&m, 0.5 * i as f64 / 100.0);
            assert!(v <= prev + 1e-14);
            prev = v;
        }
    }

    #[test]
    fn chi2_quantile_closed_forms() {
        // chi2 with 2 dof is exponential: quantile = -2 ln(1-p)
        let q95 = chi2_quantile(0.95, 2).unwrap();
        assert!((q95 - 5.991_464_547_107_982).abs() < 1e-9);
        let q50 = chi2_quantile(0.5, 2).unwrap();
        assert!((q50 - 2.0 * std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn chi2_quantile_one_dof_via_erf_bisection() {
        // oracle: CDF of chi2_1 is erf(sqrt(x/2)); bisect it
        let target = 0.95;
        let (mut lo, mut hi) = (0.0f64, 30.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let cdf = crate::special::erf((mid / 2.0).sqrt());
            if cdf < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let q = chi2_quantile(0.95, 1).unwrap();
        assert!((q - oracle).abs() < 1e-3);
        assert!((q - 3.841).abs() < 0.001);
    }

    #[test]
    fn chi2_quantile_strictly_increasing_and_accurate() {
        let mut prev = 0.0;
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = chi2_quantile(p, 2).unwrap();
            assert!(q > prev);
            prev = q;
            let cdf = crate::special::gamma_p(1.0, q / 2.0);
            assert!((cdf - p).abs() < 1e-10);
        }
    }

    #[test]
    fn chi2_quantile_rejects_bad_probability() {
        assert!(chi2_quantile(0.0, 2).is_err());
        assert!(chi2_quantile(1.0, 2).is_err());
        assert!(chi2_quantile(0.5, 0).is_err());
    }
}
