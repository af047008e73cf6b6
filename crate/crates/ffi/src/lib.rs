//! C ABI over the annuli analysis library.
//!
//! Conventions: every function returns an [`AnnuliStatus`]; results come back
//! through out-pointers or opaque handles. Handles are created by `*_new`
//! functions and must be released with the matching `*_free`. Arrays written
//! through out-pointers use caller-allocated buffers whose length is part of
//! the contract (query the handle for dimensions first). On any non-OK
//! status, a thread-local message describing the failure is available from
//! [`annuli_last_error_message`] until the next call on the same thread.

use annuli_core::detrend::{detrend_friedman, detrend_spline};
use annuli_core::emd;
use annuli_core::error::Error;
use annuli_core::ingest::AnnualSeries;
use annuli_core::ssa;
use annuli_core::stattests::{
    adf_test, keenan_test, kpss_test, mcleod_li_test, tsay_test, ModelVariant, PKind, TestReport,
};
use annuli_core::wavelet::{cwt_morlet, ScaleGrid, Scalogram};
use annuli_core::xwavelet::{coherence, cross_wavelet, SmoothSpec};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuliStatus {
    /// Success.
    Ok = 0,
    /// A parameter or configuration value is outside its domain.
    InvalidArgument = 2,
    /// The input data are unusable (too short, non-finite, gaps).
    DataError = 3,
    /// A numeric failure (degenerate series, singular system).
    NumericError = 4,
    /// A required pointer was null.
    NullPointer = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(error: &Error) -> AnnuliStatus {
    match error {
        Error::Config(_) | Error::Parameter(_) => AnnuliStatus::InvalidArgument,
        Error::Parse { .. }
        | Error::MissingYear { .. }
        | Error::Io(_)
        | Error::InsufficientData { .. }
        | Error::NonFinite => AnnuliStatus::DataError,
        Error::Degenerate(_) | Error::GridMismatch | Error::UnsmoothedCoherence => {
            AnnuliStatus::NumericError
        }
    }
}

// Run a closure behind the panic boundary, translating errors to statuses.
fn guarded<F: FnOnce() -> Result<(), Error>>(f: F) -> AnnuliStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnnuliStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AnnuliStatus::Panic
        }
    }
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], Error> {
    if ptr.is_null() {
        return Err(Error::Parameter("null pointer".into()));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn out_arg<'a>(ptr: *mut f64, len: usize) -> Result<&'a mut [f64], Error> {
    if ptr.is_null() {
        return Err(Error::Parameter("null pointer".into()));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// Message for the most recent failure on this thread, or null when the last
/// call succeeded. The pointer stays valid until the next FFI call on the
/// same thread.
#[no_mangle]
pub extern "C" fn annuli_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn annuli_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// detrending

/// Cubic smoothing-spline detrend of `values[0..len]`. Writes the trend and
/// the residual into caller buffers of length `len`.
///
/// # Safety
/// `values`, `trend_out` and `cycle_out` must point to `len` readable
/// (respectively writable) doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_detrend_spline(
    values: *const f64,
    len: usize,
    stiffness: f64,
    trend_out: *mut f64,
    cycle_out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        let input = slice_arg(values, len)?;
        let series = AnnualSeries::new(0, input.to_vec(), "ffi", "")?;
        let d = detrend_spline(&series, stiffness)?;
        out_arg(trend_out, len)?.copy_from_slice(d.trend());
        out_arg(cycle_out, len)?.copy_from_slice(d.cycle());
        Ok(())
    })
}

/// Variable-span supersmoother detrend; buffers as in
/// [`annuli_detrend_spline`].
///
/// # Safety
/// `values`, `trend_out` and `cycle_out` must point to `len` readable
/// (respectively writable) doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_detrend_friedman(
    values: *const f64,
    len: usize,
    bass: f64,
    trend_out: *mut f64,
    cycle_out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        let input = slice_arg(values, len)?;
        let series = AnnualSeries::new(0, input.to_vec(), "ffi", "")?;
        let d = detrend_friedman(&series, bass)?;
        out_arg(trend_out, len)?.copy_from_slice(d.trend());
        out_arg(cycle_out, len)?.copy_from_slice(d.cycle());
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// diagnostic tests

/// Deterministic-component variant for the stationarity tests.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuliVariant {
    NoDriftNoTrend = 0,
    Drift = 1,
    DriftTrend = 2,
}

impl From<AnnuliVariant> for ModelVariant {
    fn from(v: AnnuliVariant) -> Self {
        match v {
            AnnuliVariant::NoDriftNoTrend => ModelVariant::NoDriftNoTrend,
            AnnuliVariant::Drift => ModelVariant::Drift,
            AnnuliVariant::DriftTrend => ModelVariant::DriftTrend,
        }
    }
}

/// How a reported p-value is bounded.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuliPKind {
    Exact = 0,
    LessThan = 1,
    GreaterThan = 2,
}

/// Result of one diagnostic test.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnnuliTestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub p_kind: AnnuliPKind,
}

fn convert_report(r: TestReport) -> AnnuliTestReport {
    AnnuliTestReport {
        statistic: r.statistic,
        p_value: r.p_value.value,
        p_kind: match r.p_value.kind {
            PKind::Exact => AnnuliPKind::Exact,
            PKind::LessThan => AnnuliPKind::LessThan,
            PKind::GreaterThan => AnnuliPKind::GreaterThan,
        },
    }
}

/// Which diagnostic test to run through [`annuli_run_test`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuliTestKind {
    /// KPSS; `param` is ignored.
    Kpss = 0,
    /// ADF; `param` is ignored.
    Adf = 1,
    /// Keenan; `param` is the AR order.
    Keenan = 2,
    /// Tsay; `param` is the AR order.
    Tsay = 3,
    /// McLeod-Li; `param` is the lag count.
    McleodLi = 4,
}

/// Run one diagnostic test on `values[0..len]` and fill `report_out`.
///
/// # Safety
/// `values` must point to `len` readable doubles and `report_out` to a
/// writable [`AnnuliTestReport`].
#[no_mangle]
pub unsafe extern "C" fn annuli_run_test(
    kind: AnnuliTestKind,
    values: *const f64,
    len: usize,
    variant: AnnuliVariant,
    param: usize,
    report_out: *mut AnnuliTestReport,
) -> AnnuliStatus {
    guarded(|| {
        let input = slice_arg(values, len)?;
        if report_out.is_null() {
            return Err(Error::Parameter("null report pointer".into()));
        }
        let report = match kind {
            AnnuliTestKind::Kpss => kpss_test(input, variant.into())?,
            AnnuliTestKind::Adf => adf_test(input, variant.into())?,
            AnnuliTestKind::Keenan => keenan_test(input, param)?,
            AnnuliTestKind::Tsay => tsay_test(input, param)?,
            AnnuliTestKind::McleodLi => mcleod_li_test(input, param)?,
        };
        *report_out = convert_report(report);
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// EMD

/// Opaque EMD decomposition handle.
pub struct AnnuliEmd {
    set: emd::ImfSet,
    len: usize,
}

/// Decompose `values[0..len]` by sifting. Pass 0 for the defaults
/// (epsilon 0.05, 10 IMFs, 50 sifts). Returns null on failure.
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_emd_new(
    values: *const f64,
    len: usize,
    epsilon: f64,
    max_imfs: usize,
    max_sifts: usize,
) -> *mut AnnuliEmd {
    clear_error();
    let result = catch_unwind(|| {
        let input = slice_arg(values, len)?;
        let eps = if epsilon == 0.0 {
            emd::DEFAULT_EPSILON
        } else {
            epsilon
        };
        let imfs = if max_imfs == 0 {
            emd::DEFAULT_MAX_IMFS
        } else {
            max_imfs
        };
        let sifts = if max_sifts == 0 {
            emd::DEFAULT_MAX_SIFTS
        } else {
            max_sifts
        };
        let set = emd::sift(input, eps, imfs, sifts)?;
        Ok::<_, Error>(Box::new(AnnuliEmd { set, len }))
    });
    match result {
        Ok(Ok(handle)) => Box::into_raw(handle),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Number of IMFs in the decomposition; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live pointer from [`annuli_emd_new`].
#[no_mangle]
pub unsafe extern "C" fn annuli_emd_count(handle: *const AnnuliEmd) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).set.n_imfs()
}

/// Copy IMF `index` (0-based) into a caller buffer of the series length.
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_emd_new`] and `out` must
/// point to as many writable doubles as the decomposed series had.
#[no_mangle]
pub unsafe extern "C" fn annuli_emd_imf(
    handle: *const AnnuliEmd,
    index: usize,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let emd_ref = &*handle;
        if index >= emd_ref.set.n_imfs() {
            return Err(Error::Parameter(format!(
                "IMF index {index} out of range ({} IMFs)",
                emd_ref.set.n_imfs()
            )));
        }
        out_arg(out, emd_ref.len)?.copy_from_slice(&emd_ref.set.imfs[index]);
        Ok(())
    })
}

/// Copy the residual into a caller buffer of the series length.
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_emd_new`]; `out` as in
/// [`annuli_emd_imf`].
#[no_mangle]
pub unsafe extern "C" fn annuli_emd_residual(
    handle: *const AnnuliEmd,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let emd_ref = &*handle;
        out_arg(out, emd_ref.len)?.copy_from_slice(&emd_ref.set.residual);
        Ok(())
    })
}

/// Release an EMD handle. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer from [`annuli_emd_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuli_emd_free(handle: *mut AnnuliEmd) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// ---------------------------------------------------------------------------
// SSA

/// Opaque SSA model handle.
pub struct AnnuliSsa {
    model: ssa::SsaModel,
}

/// Embed and decompose `values[0..len]` with window `window` (0 for the
/// default min(N/2, 25)). Returns null on failure.
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_ssa_new(
    values: *const f64,
    len: usize,
    window: usize,
) -> *mut AnnuliSsa {
    clear_error();
    let result = catch_unwind(|| {
        let input = slice_arg(values, len)?;
        let w = if window == 0 {
            ssa::default_window(len)
        } else {
            window
        };
        let model = ssa::embed_decompose(input, w)?;
        Ok::<_, Error>(Box::new(AnnuliSsa { model }))
    });
    match result {
        Ok(Ok(handle)) => Box::into_raw(handle),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Number of stored singular values (the window length).
///
/// # Safety
/// `handle` must be null or a live pointer from [`annuli_ssa_new`].
#[no_mangle]
pub unsafe extern "C" fn annuli_ssa_count(handle: *const AnnuliSsa) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).model.singular_values.len()
}

/// Copy the normalized eigenvalue shares (descending) into `out`.
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_ssa_new`]; `out` must point
/// to [`annuli_ssa_count`] writable doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_ssa_scree(handle: *const AnnuliSsa, out: *mut f64) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let model = &(*handle).model;
        out_arg(out, model.singular_values.len())?.copy_from_slice(&model.scree());
        Ok(())
    })
}

/// Reconstruct the series from the 0-based components in
/// `indices[0..n_indices]`; writes the series length into the buffer.
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_ssa_new`]; `indices` must
/// point to `n_indices` readable usize values; `out` must point to as many
/// writable doubles as the decomposed series had.
#[no_mangle]
pub unsafe extern "C" fn annuli_ssa_reconstruct(
    handle: *const AnnuliSsa,
    indices: *const usize,
    n_indices: usize,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() || indices.is_null() {
            return Err(Error::Parameter("null pointer".into()));
        }
        let model = &(*handle).model;
        let group = std::slice::from_raw_parts(indices, n_indices);
        let rec = model.reconstruct(group)?;
        out_arg(out, model.source_len)?.copy_from_slice(&rec);
        Ok(())
    })
}

/// Release an SSA handle. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer from [`annuli_ssa_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuli_ssa_free(handle: *mut AnnuliSsa) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// ---------------------------------------------------------------------------
// wavelet

/// Opaque scalogram handle.
pub struct AnnuliScalogram {
    sc: Scalogram,
}

/// Morlet scalogram of `values[0..len]`. Pass 0 for defaults: s0 = 2,
/// dj = 0.05, n_scales chosen to reach N/2, omega0 = 6. Returns null on
/// failure.
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn annuli_cwt_new(
    values: *const f64,
    len: usize,
    s0: f64,
    dj: f64,
    n_scales: usize,
    omega0: f64,
) -> *mut AnnuliScalogram {
    clear_error();
    let result = catch_unwind(|| {
        let input = slice_arg(values, len)?;
        let s0 = if s0 == 0.0 { 2.0 } else { s0 };
        let dj = if dj == 0.0 { 0.05 } else { dj };
        let omega0 = if omega0 == 0.0 { 6.0 } else { omega0 };
        let grid = if n_scales == 0 {
            ScaleGrid::with_resolution(len, s0, dj)?
        } else {
            ScaleGrid::new(s0, dj, n_scales, len)?
        };
        let sc = cwt_morlet(input, &grid, omega0)?;
        Ok::<_, Error>(Box::new(AnnuliScalogram { sc }))
    });
    match result {
        Ok(Ok(handle)) => Box::into_raw(handle),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Number of scales (rows).
///
/// # Safety
/// `handle` must be null or a live pointer from [`annuli_cwt_new`].
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_n_scales(handle: *const AnnuliScalogram) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).sc.n_scales()
}

/// Number of time columns.
///
/// # Safety
/// `handle` must be null or a live pointer from [`annuli_cwt_new`].
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_n_times(handle: *const AnnuliScalogram) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).sc.n_times()
}

/// Copy the scale axis into `out` (`n_scales` doubles).
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
/// the dimension queries.
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_scales(
    handle: *const AnnuliScalogram,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let sc = &(*handle).sc;
        out_arg(out, sc.n_scales())?.copy_from_slice(&sc.grid.scales);
        Ok(())
    })
}

/// Copy `|W|^2` into `out`, row-major with scale rows (`n_scales * n_times`
/// doubles).
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
/// the dimension queries.
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_power(
    handle: *const AnnuliScalogram,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let sc = &(*handle).sc;
        let buf = out_arg(out, sc.n_scales() * sc.n_times())?;
        for (j, row) in sc.power.iter().enumerate() {
            buf[j * sc.n_times()..(j + 1) * sc.n_times()].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Copy the cone of influence (largest trustworthy scale per time) into
/// `out` (`n_times` doubles).
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
/// the dimension queries.
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_coi(
    handle: *const AnnuliScalogram,
    out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let sc = &(*handle).sc;
        out_arg(out, sc.n_times())?.copy_from_slice(&sc.coi);
        Ok(())
    })
}

/// Copy a significance mask (1 = significant) into `out`, row-major
/// (`n_scales * n_times` bytes). `level` selects 90 or 95.
///
/// # Safety
/// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` must point
/// to `n_scales * n_times` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_sig_mask(
    handle: *const AnnuliScalogram,
    level: u32,
    out: *mut u8,
) -> AnnuliStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return Err(Error::Parameter("null pointer".into()));
        }
        let sc = &(*handle).sc;
        let mask = match level {
            90 => &sc.sig90,
            95 => &sc.sig95,
            other => {
                return Err(Error::Parameter(format!(
                    "significance level must be 90 or 95, got {other}"
                )))
            }
        };
        let buf = std::slice::from_raw_parts_mut(out, sc.n_scales() * sc.n_times());
        for (j, row) in mask.iter().enumerate() {
            for (t, &b) in row.iter().enumerate() {
                buf[j * sc.n_times() + t] = u8::from(b);
            }
        }
        Ok(())
    })
}

/// Release a scalogram handle. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer from [`annuli_cwt_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuli_scalogram_free(handle: *mut AnnuliScalogram) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// ---------------------------------------------------------------------------
// pairwise analysis

/// Cross-wavelet power of two scalograms on the same grid, written row-major
/// into `power_out` and the phase angles into `phase_out` (both
/// `n_scales * n_times` doubles; either may be null to skip it).
///
/// # Safety
/// `x` and `y` must be live pointers from [`annuli_cwt_new`]; non-null out
/// buffers must be sized per the dimension queries.
#[no_mangle]
pub unsafe extern "C" fn annuli_cross_power(
    x: *const AnnuliScalogram,
    y: *const AnnuliScalogram,
    power_out: *mut f64,
    phase_out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if x.is_null() || y.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let sx = &(*x).sc;
        let sy = &(*y).sc;
        let cross = cross_wavelet(sx, sy)?;
        let cells = sx.n_scales() * sx.n_times();
        if !power_out.is_null() {
            let buf = out_arg(power_out, cells)?;
            for (j, row) in cross.power.iter().enumerate() {
                buf[j * sx.n_times()..(j + 1) * sx.n_times()].copy_from_slice(row);
            }
        }
        if !phase_out.is_null() {
            let buf = out_arg(phase_out, cells)?;
            for (j, row) in cross.phase.iter().enumerate() {
                buf[j * sx.n_times()..(j + 1) * sx.n_times()].copy_from_slice(row);
            }
        }
        Ok(())
    })
}

/// Squared wavelet coherence of two scalograms on the same grid, written
/// row-major into `r2_out` (`n_scales * n_times` doubles).
///
/// # Safety
/// `x` and `y` must be live pointers from [`annuli_cwt_new`]; `r2_out` must
/// be sized per the dimension queries.
#[no_mangle]
pub unsafe extern "C" fn annuli_coherence(
    x: *const AnnuliScalogram,
    y: *const AnnuliScalogram,
    r2_out: *mut f64,
) -> AnnuliStatus {
    guarded(|| {
        if x.is_null() || y.is_null() {
            return Err(Error::Parameter("null handle".into()));
        }
        let sx = &(*x).sc;
        let sy = &(*y).sc;
        let map = coherence(sx, sy, SmoothSpec::default())?;
        let buf = out_arg(r2_out, sx.n_scales() * sx.n_times())?;
        for (j, row) in map.r2.iter().enumerate() {
            buf[j * sx.n_times()..(j + 1) * sx.n_times()].copy_from_slice(row);
        }
        Ok(())
    })
}
