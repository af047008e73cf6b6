//! Seeded pseudo-random streams and synthetic-series generators.
//!
//! Everything simulation-shaped in this crate (surrogate series, Monte Carlo
//! calibration, synthetic fixtures) draws from [`SeededStream`] so results are
//! reproducible bit for bit from a single 64-bit seed. The generator is a
//! SplitMix64-style counter mix: 64-bit state advanced by a fixed odd gamma and
//! scrambled through two multiply-xorshift rounds. Splitting a stream derives a
//! child seed from the parent's output, so parent and child sequences come from
//! disjoint counter ranges.

use crate::error::{Error, Result};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Deterministic random stream with value semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededStream {
    state: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { state: seed }
    }

    fn mix(mut z: u64) -> u64 {
        z ^= z >> 30;
        z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z ^= z >> 27;
        z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        Self::mix(self.state)
    }

    /// Derive an independent child stream; the parent advances by one step.
    pub fn split(&mut self) -> SeededStream {
        SeededStream::new(self.next_u64())
    }

    /// Uniform draw in the half-open interval (0, 1].
    pub fn next_uniform(&mut self) -> f64 {
        let bits = self.next_u64() >> 11; // 53 significant bits
        (bits as f64 + 1.0) / 9_007_199_254_740_992.0
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// One sinusoidal component for [`gen_sum_of_tones`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    /// Period in samples; must exceed 2 samples to be representable.
    pub period: f64,
    pub amplitude: f64,
    /// Phase offset in radians.
    pub phase: f64,
}

/// Simulate an AR(1) process `x_t = alpha * x_{t-1} + e_t` with Gaussian
/// innovations of standard deviation `sigma`; the initial value is drawn from
/// the stationary distribution.
pub fn gen_ar1(n: usize, alpha: f64, sigma: f64, stream: &mut SeededStream) -> Result<Vec<f64>> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::Parameter(format!(
            "|alpha| must be < 1, got {alpha}"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    let stationary_sd = sigma / (1.0 - alpha * alpha).sqrt();
    let mut x = stationary_sd * stream.next_normal();
    out.push(x);
    for _ in 1..n {
        x = alpha * x + sigma * stream.next_normal();
        out.push(x);
    }
    Ok(out)
}

/// Sum of cosine tones plus optional white noise:
/// `sum_j A_j cos(2 pi t / T_j + phi_j) + noise`.
///
/// Caller contract: every tone period exceeds 2 samples.
pub fn gen_sum_of_tones(
    n: usize,
    tones: &[Tone],
    noise_sd: f64,
    stream: &mut SeededStream,
) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for tone in tones {
        for (t, v) in out.iter_mut().enumerate() {
            *v += tone.amplitude
                * (std::f64::consts::TAU * t as f64 / tone.period + tone.phase).cos();
        }
    }
    if noise_sd > 0.0 {
        for v in out.iter_mut() {
            *v += noise_sd * stream.next_normal();
        }
    }
    out
}
