//! Decomposition and spectral analysis of annual time series.
//!
//! The crate covers a complete analysis chain for short yearly records:
//!
//! 1. ingest and annualize raw data files ([`ingest`]);
//! 2. detrend by smoothing spline or variable-span supersmoother
//!    ([`detrend`]);
//! 3. test the detrended signal for stationarity and nonlinearity
//!    ([`stattests`]);
//! 4. strip high-frequency noise with empirical mode decomposition ([`emd`])
//!    or singular spectrum analysis ([`ssa`]);
//! 5. locate oscillations in time-scale space with the Morlet continuous
//!    wavelet transform, with AR(1) red-noise significance ([`wavelet`]);
//! 6. relate pairs of series through cross-wavelet power and wavelet
//!    coherence ([`xwavelet`]).
//!
//! [`spectral`] holds the shared Fourier machinery, [`rng`] the seeded
//! streams behind every simulation, [`svgplot`] the SVG heatmap renderer and
//! [`pipeline`] the end-to-end runner used by the `annuli` binary.

pub mod detrend;
pub mod emd;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod ssa;
pub mod stattests;
pub mod svgplot;
pub mod wavelet;
pub mod xwavelet;

mod linalg;
mod special;

pub use error::{Error, Result};
