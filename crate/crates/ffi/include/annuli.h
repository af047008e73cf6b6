/* C interface to the annuli annual-series analysis library. */

#ifndef ANNULI_H
#define ANNULI_H

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// How a reported p-value is bounded.
typedef enum AnnuliPKind {
  ANNULI_P_KIND_EXACT = 0,
  ANNULI_P_KIND_LESS_THAN = 1,
  ANNULI_P_KIND_GREATER_THAN = 2,
} AnnuliPKind;

// Status code of every FFI call.
typedef enum AnnuliStatus {
  // Success.
  ANNULI_STATUS_OK = 0,
  // A parameter or configuration value is outside its domain.
  ANNULI_STATUS_INVALID_ARGUMENT = 2,
  // The input data are unusable (too short, non-finite, gaps).
  ANNULI_STATUS_DATA_ERROR = 3,
  // A numeric failure (degenerate series, singular system).
  ANNULI_STATUS_NUMERIC_ERROR = 4,
  // A required pointer was null.
  ANNULI_STATUS_NULL_POINTER = 5,
  // An internal panic was caught at the boundary.
  ANNULI_STATUS_PANIC = 6,
} AnnuliStatus;

// Which diagnostic test to run through [`annuli_run_test`].
typedef enum AnnuliTestKind {
  // KPSS; `param` is ignored.
  ANNULI_TEST_KIND_KPSS = 0,
  // ADF; `param` is ignored.
  ANNULI_TEST_KIND_ADF = 1,
  // Keenan; `param` is the AR order.
  ANNULI_TEST_KIND_KEENAN = 2,
  // Tsay; `param` is the AR order.
  ANNULI_TEST_KIND_TSAY = 3,
  // McLeod-Li; `param` is the lag count.
  ANNULI_TEST_KIND_MCLEOD_LI = 4,
} AnnuliTestKind;

// Deterministic-component variant for the stationarity tests.
typedef enum AnnuliVariant {
  ANNULI_VARIANT_NO_DRIFT_NO_TREND = 0,
  ANNULI_VARIANT_DRIFT = 1,
  ANNULI_VARIANT_DRIFT_TREND = 2,
} AnnuliVariant;

// Opaque EMD decomposition handle.
typedef struct AnnuliEmd AnnuliEmd;

// Opaque scalogram handle.
typedef struct AnnuliScalogram AnnuliScalogram;

// Opaque SSA model handle.
typedef struct AnnuliSsa AnnuliSsa;

// Result of one diagnostic test.
typedef struct AnnuliTestReport {
  double statistic;
  double p_value;
  enum AnnuliPKind p_kind;
} AnnuliTestReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null when the last
// call succeeded. The pointer stays valid until the next FFI call on the
// same thread.
const char *annuli_last_error_message(void);

// Library version as a static C string.
const char *annuli_version(void);

// Cubic smoothing-spline detrend of `values[0..len]`. Writes the trend and
// the residual into caller buffers of length `len`.
//
// # Safety
// `values`, `trend_out` and `cycle_out` must point to `len` readable
// (respectively writable) doubles.
enum AnnuliStatus annuli_detrend_spline(const double *values,
                                        uintptr_t len,
                                        double stiffness,
                                        double *trend_out,
                                        double *cycle_out);

// Variable-span supersmoother detrend; buffers as in
// [`annuli_detrend_spline`].
//
// # Safety
// `values`, `trend_out` and `cycle_out` must point to `len` readable
// (respectively writable) doubles.
enum AnnuliStatus annuli_detrend_friedman(const double *values,
                                          uintptr_t len,
                                          double bass,
                                          double *trend_out,
                                          double *cycle_out);

// Run one diagnostic test on `values[0..len]` and fill `report_out`.
//
// # Safety
// `values` must point to `len` readable doubles and `report_out` to a
// writable [`AnnuliTestReport`].
enum AnnuliStatus annuli_run_test(enum AnnuliTestKind kind,
                                  const double *values,
                                  uintptr_t len,
                                  enum AnnuliVariant variant,
                                  uintptr_t param,
                                  struct AnnuliTestReport *report_out);

// Decompose `values[0..len]` by sifting. Pass 0 for the defaults
// (epsilon 0.05, 10 IMFs, 50 sifts). Returns null on failure.
//
// # Safety
// `values` must point to `len` readable doubles.
struct AnnuliEmd *annuli_emd_new(const double *values,
                                 uintptr_t len,
                                 double epsilon,
                                 uintptr_t max_imfs,
                                 uintptr_t max_sifts);

// Number of IMFs in the decomposition; 0 for a null handle.
//
// # Safety
// `handle` must be null or a live pointer from [`annuli_emd_new`].
uintptr_t annuli_emd_count(const struct AnnuliEmd *handle);

// Copy IMF `index` (0-based) into a caller buffer of the series length.
//
// # Safety
// `handle` must be a live pointer from [`annuli_emd_new`] and `out` must
// point to as many writable doubles as the decomposed series had.
enum AnnuliStatus annuli_emd_imf(const struct AnnuliEmd *handle, uintptr_t index, double *out);

// Copy the residual into a caller buffer of the series length.
//
// # Safety
// `handle` must be a live pointer from [`annuli_emd_new`]; `out` as in
// [`annuli_emd_imf`].
enum AnnuliStatus annuli_emd_residual(const struct AnnuliEmd *handle, double *out);

// Release an EMD handle. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer from [`annuli_emd_new`] not yet freed.
void annuli_emd_free(struct AnnuliEmd *handle);

// Embed and decompose `values[0..len]` with window `window` (0 for the
// default min(N/2, 25)). Returns null on failure.
//
// # Safety
// `values` must point to `len` readable doubles.
struct AnnuliSsa *annuli_ssa_new(const double *values, uintptr_t len, uintptr_t window);

// Number of stored singular values (the window length).
//
// # Safety
// `handle` must be null or a live pointer from [`annuli_ssa_new`].
uintptr_t annuli_ssa_count(const struct AnnuliSsa *handle);

// Copy the normalized eigenvalue shares (descending) into `out`.
//
// # Safety
// `handle` must be a live pointer from [`annuli_ssa_new`]; `out` must point
// to [`annuli_ssa_count`] writable doubles.
enum AnnuliStatus annuli_ssa_scree(const struct AnnuliSsa *handle, double *out);

// Reconstruct the series from the 0-based components in
// `indices[0..n_indices]`; writes the series length into the buffer.
//
// # Safety
// `handle` must be a live pointer from [`annuli_ssa_new`]; `indices` must
// point to `n_indices` readable usize values; `out` must point to as many
// writable doubles as the decomposed series had.
enum AnnuliStatus annuli_ssa_reconstruct(const struct AnnuliSsa *handle,
                                         const uintptr_t *indices,
                                         uintptr_t n_indices,
                                         double *out);

// Release an SSA handle. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer from [`annuli_ssa_new`] not yet freed.
void annuli_ssa_free(struct AnnuliSsa *handle);

// Morlet scalogram of `values[0..len]`. Pass 0 for defaults: s0 = 2,
// dj = 0.05, n_scales chosen to reach N/2, omega0 = 6. Returns null on
// failure.
//
// # Safety
// `values` must point to `len` readable doubles.
struct AnnuliScalogram *annuli_cwt_new(const double *values,
                                       uintptr_t len,
                                       double s0,
                                       double dj,
                                       uintptr_t n_scales,
                                       double omega0);

// Number of scales (rows).
//
// # Safety
// `handle` must be null or a live pointer from [`annuli_cwt_new`].
uintptr_t annuli_scalogram_n_scales(const struct AnnuliScalogram *handle);

// Number of time columns.
//
// # Safety
// `handle` must be null or a live pointer from [`annuli_cwt_new`].
uintptr_t annuli_scalogram_n_times(const struct AnnuliScalogram *handle);

// Copy the scale axis into `out` (`n_scales` doubles).
//
// # Safety
// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
// the dimension queries.
enum AnnuliStatus annuli_scalogram_scales(const struct AnnuliScalogram *handle, double *out);

// Copy `|W|^2` into `out`, row-major with scale rows (`n_scales * n_times`
// doubles).
//
// # Safety
// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
// the dimension queries.
enum AnnuliStatus annuli_scalogram_power(const struct AnnuliScalogram *handle, double *out);

// Copy the cone of influence (largest trustworthy scale per time) into
// `out` (`n_times` doubles).
//
// # Safety
// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` sized per
// the dimension queries.
enum AnnuliStatus annuli_scalogram_coi(const struct AnnuliScalogram *handle, double *out);

// Copy a significance mask (1 = significant) into `out`, row-major
// (`n_scales * n_times` bytes). `level` selects 90 or 95.
//
// # Safety
// `handle` must be a live pointer from [`annuli_cwt_new`]; `out` must point
// to `n_scales * n_times` writable bytes.
enum AnnuliStatus annuli_scalogram_sig_mask(const struct AnnuliScalogram *handle,
                                            uint32_t level,
                                            uint8_t *out);

// Release a scalogram handle. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer from [`annuli_cwt_new`] not yet freed.
void annuli_scalogram_free(struct AnnuliScalogram *handle);

// Cross-wavelet power of two scalograms on the same grid, written row-major
// into `power_out` and the phase angles into `phase_out` (both
// `n_scales * n_times` doubles; either may be null to skip it).
//
// # Safety
// `x` and `y` must be live pointers from [`annuli_cwt_new`]; non-null out
// buffers must be sized per the dimension queries.
enum AnnuliStatus annuli_cross_power(const struct AnnuliScalogram *x,
                                     const struct AnnuliScalogram *y,
                                     double *power_out,
                                     double *phase_out);

// Squared wavelet coherence of two scalograms on the same grid, written
// row-major into `r2_out` (`n_scales * n_times` doubles).
//
// # Safety
// `x` and `y` must be live pointers from [`annuli_cwt_new`]; `r2_out` must
// be sized per the dimension queries.
enum AnnuliStatus annuli_coherence(const struct AnnuliScalogram *x,
                                   const struct AnnuliScalogram *y,
                                   double *r2_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANNULI_H */
