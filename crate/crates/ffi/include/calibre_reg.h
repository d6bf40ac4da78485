/* SPDX-License-Identifier: Apache-2.0 */

#ifndef CALIBRE_REG_H
#define CALIBRE_REG_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of a fallible call.
typedef enum {
  CALIBRE_STATUS_OK = 0,
  // Bad argument or configuration (exit code 1).
  CALIBRE_STATUS_USAGE = 1,
  // Input data rejected (exit code 2).
  CALIBRE_STATUS_VALIDATION = 2,
  // A computation could not be completed (exit code 3).
  CALIBRE_STATUS_NUMERICAL = 3,
  // A required pointer argument was null.
  CALIBRE_STATUS_NULL_POINTER = 4,
  // The library panicked; the handle arguments should be considered lost.
  CALIBRE_STATUS_PANIC = 5,
} CalibreStatus;

// Synthetic scenario selector for [`calibre_synthetic_generate`].
typedef enum {
  // sigma equals the true standard deviation.
  CALIBRE_SCENARIO_ORACLE = 0,
  // sigma drawn independently from U[1, 10].
  CALIBRE_SCENARIO_RANDOM = 1,
  // sigma is the true standard deviation divided by a factor.
  CALIBRE_SCENARIO_OVERCONFIDENT = 2,
} CalibreScenario;

// Interpolation between isotonic knots.
typedef enum {
  CALIBRE_INTERPOLATION_LINEAR = 0,
  CALIBRE_INTERPOLATION_STEP = 1,
} CalibreInterpolation;

// Validated forecasts `(mu, sigma, y)`.
typedef struct CalibreForecastSet CalibreForecastSet;

// Fitted isotonic recalibration of forecast CDFs.
typedef struct CalibreInterval CalibreInterval;

// Binned calibration summary of a forecast set.
typedef struct CalibreReport CalibreReport;

// Fitted single-factor sigma scaling.
typedef struct CalibreScaling CalibreScaling;

// One row of a reliability diagram.
typedef struct {
  size_t count;
  double rmv;
  double rmse;
  double sigma_min;
  double sigma_max;
} CalibreBin;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread, or null.
// The pointer stays valid until the next library call on the same thread.
const char *calibre_last_error(void);

// Library version as a static NUL-terminated string.
const char *calibre_version(void);

// Releases a string returned by a `*_to_json` call. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void calibre_string_free(char *s);

// Builds a forecast set from three parallel arrays of length `len`.
//
// # Safety
// Each array must hold `len` readable doubles; `out` must be writable.
CalibreStatus calibre_forecast_set_new(const double *mu,
                                       const double *sigma,
                                       const double *y,
                                       size_t len,
                                       CalibreForecastSet **out_set);

// Reads a CSV (`mu,sigma,y`) or JSON forecast file.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
CalibreStatus calibre_forecast_set_load(const char *path, CalibreForecastSet **out_set);

// Number of records; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t calibre_forecast_set_len(const CalibreForecastSet *set);

// Copies the records into three caller-owned arrays of exactly the set's length.
//
// # Safety
// Each array must hold `len` writable doubles.
CalibreStatus calibre_forecast_set_copy(const CalibreForecastSet *set,
                                        double *mu,
                                        double *sigma,
                                        double *y,
                                        size_t len);

// # Safety
// `set` must be null or a live handle, not used afterwards.
void calibre_forecast_set_free(CalibreForecastSet *set);

// Generates a synthetic set. `factor` is used by the overconfident scenario only.
//
// # Safety
// `out_set` must be writable.
CalibreStatus calibre_synthetic_generate(CalibreScenario scenario,
                                         double factor,
                                         size_t n,
                                         uint64_t seed,
                                         CalibreForecastSet **out_set);

// Bins by sigma and computes ENCE, c_v and mean NLL.
// `n_bins == 0` selects the default bin count.
//
// # Safety
// `set` must be a live handle; `out_report` must be writable.
CalibreStatus calibre_evaluate(const CalibreForecastSet *set,
                               size_t n_bins,
                               CalibreReport **out_report);

// ENCE of a report; NaN for a null handle.
//
// # Safety
// `report` must be null or a live handle.
double calibre_report_ence(const CalibreReport *report);

// Coefficient of variation of sigma; NaN for a null handle.
//
// # Safety
// `report` must be null or a live handle.
double calibre_report_cv(const CalibreReport *report);

// Mean Gaussian negative log-likelihood; NaN for a null handle.
//
// # Safety
// `report` must be null or a live handle.
double calibre_report_mean_nll(const CalibreReport *report);

// Number of bins; 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t calibre_report_n_bins(const CalibreReport *report);

// Copies bin `index` (0-based, ascending sigma) into `out_bin`.
//
// # Safety
// `report` must be a live handle; `out_bin` must be writable.
CalibreStatus calibre_report_bin(const CalibreReport *report, size_t index, CalibreBin *out_bin);

// Serializes a report; release the string with [`calibre_string_free`].
//
// # Safety
// `report` must be a live handle; `out_json` must be writable.
CalibreStatus calibre_report_to_json(const CalibreReport *report, char **out_json);

// # Safety
// `report` must be null or a live handle, not used afterwards.
void calibre_report_free(CalibreReport *report);

// Fits the NLL-optimal sigma factor on a recalibration set.
//
// # Safety
// `recal` must be a live handle; `out_scaling` must be writable.
CalibreStatus calibre_std_scaling_fit(const CalibreForecastSet *recal,
                                      CalibreScaling **out_scaling);

// Creates a scaling with a given factor `s > 0`.
//
// # Safety
// `out_scaling` must be writable.
CalibreStatus calibre_std_scaling_new(double s, CalibreScaling **out_scaling);

// The fitted factor; NaN for a null handle.
//
// # Safety
// `scaling` must be null or a live handle.
double calibre_std_scaling_factor(const CalibreScaling *scaling);

// Returns a new set with every sigma multiplied by the factor.
//
// # Safety
// Handles must be live; `out_set` must be writable.
CalibreStatus calibre_std_scaling_apply(const CalibreScaling *scaling,
                                        const CalibreForecastSet *set,
                                        CalibreForecastSet **out_set);

// # Safety
// `scaling` must be null or a live handle, not used afterwards.
void calibre_std_scaling_free(CalibreScaling *scaling);

// Fits an isotonic map from predicted to observed CDF levels.
//
// # Safety
// `recal` must be a live handle; `out_interval` must be writable.
CalibreStatus calibre_interval_fit(const CalibreForecastSet *recal,
                                   CalibreInterpolation interpolation,
                                   CalibreInterval **out_interval);

// Evaluates the fitted map at a CDF level `p`; NaN for a null handle.
//
// # Safety
// `interval` must be null or a live handle.
double calibre_interval_eval(const CalibreInterval *interval, double p);

// Summarizes each recalibrated forecast by its mean and standard deviation.
// `out_skipped` (optional) receives the number of records dropped.
//
// # Safety
// Handles must be live; `out_set` must be writable; `out_skipped` may be null.
CalibreStatus calibre_interval_apply(const CalibreInterval *interval,
                                     const CalibreForecastSet *set,
                                     CalibreForecastSet **out_set,
                                     size_t *out_skipped);

// Largest gap between expected and observed coverage on a held-out set,
// over levels 0.05, 0.10, ..., 0.95.
//
// # Safety
// Handles must be live; `out_deviation` must be writable.
CalibreStatus calibre_interval_plot_deviation(const CalibreInterval *interval,
                                              const CalibreForecastSet *holdout,
                                              double *out_deviation);

// Serializes the fitted map; release the string with [`calibre_string_free`].
//
// # Safety
// `interval` must be a live handle; `out_json` must be writable.
CalibreStatus calibre_interval_to_json(const CalibreInterval *interval, char **out_json);

// # Safety
// `interval` must be null or a live handle, not used afterwards.
void calibre_interval_free(CalibreInterval *interval);

// Writes the PIT values `Phi((y - mu) / sigma)` of a set into `out_pit`,
// which must hold exactly the set's length.
//
// # Safety
// `set` must be live; `out_pit` must hold `len` writable doubles.
CalibreStatus calibre_pit(const CalibreForecastSet *set, double *out_pit, size_t len);

// One-sample Kolmogorov-Smirnov test of PIT values against U(0, 1) at the
// 5% level. Needs at least 10 values.
//
// # Safety
// `pit` must hold `len` readable doubles; outputs must be writable.
CalibreStatus calibre_ks_uniformity(const double *pit,
                                    size_t len,
                                    double *out_statistic,
                                    bool *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CALIBRE_REG_H */
