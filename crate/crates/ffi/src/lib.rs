// SPDX-License-Identifier: Apache-2.0

//! C ABI for `calibre-reg`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_fit`/`*_load` call and released by the matching `*_free`.
//! Fallible calls return a [`CalibreStatus`] and write their result through an
//! out-pointer; on failure [`calibre_last_error`] describes what went wrong.
//! Status values match the command-line exit codes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use calibre_reg::interval::{ks_uniformity, pit, IntervalCalibrator, PitSample};
use calibre_reg::metrics::{default_n_bins, evaluate};
use calibre_reg::scaling::{fit_std_scaling, ScalingCalibrator};
use calibre_reg::synthetic::{generate_synthetic, ScenarioKind, SyntheticScenario};
use calibre_reg::{CalibrationReport, Calibrator, Error, ErrorKind, ForecastRecord, ForecastSet, Interpolation};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibreStatus {
    Ok = 0,
    /// Bad argument or configuration (exit code 1).
    Usage = 1,
    /// Input data rejected (exit code 2).
    Validation = 2,
    /// A computation could not be completed (exit code 3).
    Numerical = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// The library panicked; the handle arguments should be considered lost.
    Panic = 5,
}

/// Synthetic scenario selector for [`calibre_synthetic_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibreScenario {
    /// sigma equals the true standard deviation.
    Oracle = 0,
    /// sigma drawn independently from U[1, 10].
    Random = 1,
    /// sigma is the true standard deviation divided by a factor.
    Overconfident = 2,
}

/// Interpolation between isotonic knots.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibreInterpolation {
    Linear = 0,
    Step = 1,
}

/// One row of a reliability diagram.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CalibreBin {
    pub count: usize,
    pub rmv: f64,
    pub rmse: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Validated forecasts `(mu, sigma, y)`.
pub struct CalibreForecastSet(ForecastSet);

/// Binned calibration summary of a forecast set.
pub struct CalibreReport(CalibrationReport);

/// Fitted single-factor sigma scaling.
pub struct CalibreScaling(ScalingCalibrator);

/// Fitted isotonic recalibration of forecast CDFs.
pub struct CalibreInterval(IntervalCalibrator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn status_of(e: &Error) -> CalibreStatus {
    match e.kind() {
        ErrorKind::Usage => CalibreStatus::Usage,
        ErrorKind::Validation => CalibreStatus::Validation,
        ErrorKind::Numerical => CalibreStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CalibreStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CalibreStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            CalibreStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CalibreStatus::Panic
        }
    }
}

/// Value-returning accessors cannot report a status; they return `fallback`
/// for a null handle or a panic.
fn query<T>(fallback: T, f: impl FnOnce() -> Option<T>) -> T {
    catch_unwind(AssertUnwindSafe(f)).ok().flatten().unwrap_or(fallback)
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn json_out(json: String, dst: &mut *mut c_char) -> FfiResult<()> {
    *dst = CString::new(json)
        .map_err(|e| Error::Malformed(e.to_string()))?
        .into_raw();
    Ok(())
}

/// Message for the most recent failed call on this thread, or null.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn calibre_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn calibre_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by a `*_to_json` call. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn calibre_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a forecast set from three parallel arrays of length `len`.
///
/// # Safety
/// Each array must hold `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_forecast_set_new(
    mu: *const f64,
    sigma: *const f64,
    y: *const f64,
    len: usize,
    out_set: *mut *mut CalibreForecastSet,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_set, "out_set")?;
        let (mu, sigma, y) = (slice(mu, len, "mu")?, slice(sigma, len, "sigma")?, slice(y, len, "y")?);
        let records = (0..len)
            .map(|i| ForecastRecord {
                mu: mu[i],
                sigma: sigma[i],
                y: y[i],
            })
            .collect();
        *dst = boxed(CalibreForecastSet(ForecastSet::from_records(records, "ffi")?));
        Ok(())
    })
}

/// Reads a CSV (`mu,sigma,y`) or JSON forecast file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_forecast_set_load(
    path: *const c_char,
    out_set: *mut *mut CalibreForecastSet,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_set, "out_set")?;
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Error::Usage(format!("path is not UTF-8: {e}")))?;
        *dst = boxed(CalibreForecastSet(ForecastSet::load(Path::new(path), "input")?));
        Ok(())
    })
}

/// Number of records; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_forecast_set_len(set: *const CalibreForecastSet) -> usize {
    query(0, || set.as_ref().map(|s| s.0.len()))
}

/// Copies the records into three caller-owned arrays of exactly the set's length.
///
/// # Safety
/// Each array must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn calibre_forecast_set_copy(
    set: *const CalibreForecastSet,
    mu: *mut f64,
    sigma: *mut f64,
    y: *mut f64,
    len: usize,
) -> CalibreStatus {
    guard(|| {
        let set = &handle(set, "set")?.0;
        if len != set.len() {
            return Err(Error::Usage(format!("buffer length {len} != set length {}", set.len())).into());
        }
        let (mu, sigma, y) = (
            slice_mut(mu, len, "mu")?,
            slice_mut(sigma, len, "sigma")?,
            slice_mut(y, len, "y")?,
        );
        for (i, r) in set.records().iter().enumerate() {
            mu[i] = r.mu;
            sigma[i] = r.sigma;
            y[i] = r.y;
        }
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calibre_forecast_set_free(set: *mut CalibreForecastSet) {
    free(set)
}

/// Generates a synthetic set. `factor` is used by the overconfident scenario only.
///
/// # Safety
/// `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_synthetic_generate(
    scenario: CalibreScenario,
    factor: f64,
    n: usize,
    seed: u64,
    out_set: *mut *mut CalibreForecastSet,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_set, "out_set")?;
        let kind = match scenario {
            CalibreScenario::Oracle => ScenarioKind::OracleUncertainty,
            CalibreScenario::Random => ScenarioKind::RandomUncertainty,
            CalibreScenario::Overconfident => ScenarioKind::OverconfidentByFactor { factor },
        };
        *dst = boxed(CalibreForecastSet(generate_synthetic(&SyntheticScenario::new(kind, n, seed))?));
        Ok(())
    })
}

/// Bins by sigma and computes ENCE, c_v and mean NLL.
/// `n_bins == 0` selects the default bin count.
///
/// # Safety
/// `set` must be a live handle; `out_report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_evaluate(
    set: *const CalibreForecastSet,
    n_bins: usize,
    out_report: *mut *mut CalibreReport,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_report, "out_report")?;
        let set = &handle(set, "set")?.0;
        let n = if n_bins == 0 { default_n_bins(set.len()) } else { n_bins };
        *dst = boxed(CalibreReport(evaluate(set, n)?));
        Ok(())
    })
}

/// ENCE of a report; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_ence(report: *const CalibreReport) -> f64 {
    query(f64::NAN, || report.as_ref().map(|r| r.0.ence))
}

/// Coefficient of variation of sigma; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_cv(report: *const CalibreReport) -> f64 {
    query(f64::NAN, || report.as_ref().map(|r| r.0.cv))
}

/// Mean Gaussian negative log-likelihood; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_mean_nll(report: *const CalibreReport) -> f64 {
    query(f64::NAN, || report.as_ref().map(|r| r.0.mean_nll))
}

/// Number of bins; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_n_bins(report: *const CalibreReport) -> usize {
    query(0, || report.as_ref().map(|r| r.0.bins.rows.len()))
}

/// Copies bin `index` (0-based, ascending sigma) into `out_bin`.
///
/// # Safety
/// `report` must be a live handle; `out_bin` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_bin(
    report: *const CalibreReport,
    index: usize,
    out_bin: *mut CalibreBin,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_bin, "out_bin")?;
        let rows = &handle(report, "report")?.0.bins.rows;
        let b = rows
            .get(index)
            .ok_or_else(|| Error::Usage(format!("bin {index} out of range (have {})", rows.len())))?;
        *dst = CalibreBin {
            count: b.count,
            rmv: b.rmv,
            rmse: b.rmse,
            sigma_min: b.sigma_min,
            sigma_max: b.sigma_max,
        };
        Ok(())
    })
}

/// Serializes a report; release the string with [`calibre_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_to_json(
    report: *const CalibreReport,
    out_json: *mut *mut c_char,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        json_out(handle(report, "report")?.0.to_json_pretty(), dst)
    })
}

/// # Safety
/// `report` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calibre_report_free(report: *mut CalibreReport) {
    free(report)
}

/// Fits the NLL-optimal sigma factor on a recalibration set.
///
/// # Safety
/// `recal` must be a live handle; `out_scaling` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_std_scaling_fit(
    recal: *const CalibreForecastSet,
    out_scaling: *mut *mut CalibreScaling,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_scaling, "out_scaling")?;
        *dst = boxed(CalibreScaling(fit_std_scaling(&handle(recal, "recal")?.0)?));
        Ok(())
    })
}

/// Creates a scaling with a given factor `s > 0`.
///
/// # Safety
/// `out_scaling` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_std_scaling_new(s: f64, out_scaling: *mut *mut CalibreScaling) -> CalibreStatus {
    guard(|| {
        let dst = out(out_scaling, "out_scaling")?;
        *dst = boxed(CalibreScaling(ScalingCalibrator::with_factor(s)?));
        Ok(())
    })
}

/// The fitted factor; NaN for a null handle.
///
/// # Safety
/// `scaling` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_std_scaling_factor(scaling: *const CalibreScaling) -> f64 {
    query(f64::NAN, || scaling.as_ref().map(|c| c.0.s))
}

/// Returns a new set with every sigma multiplied by the factor.
///
/// # Safety
/// Handles must be live; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_std_scaling_apply(
    scaling: *const CalibreScaling,
    set: *const CalibreForecastSet,
    out_set: *mut *mut CalibreForecastSet,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_set, "out_set")?;
        let cal = &handle(scaling, "scaling")?.0;
        *dst = boxed(CalibreForecastSet(cal.apply(&handle(set, "set")?.0)?));
        Ok(())
    })
}

/// # Safety
/// `scaling` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calibre_std_scaling_free(scaling: *mut CalibreScaling) {
    free(scaling)
}

/// Fits an isotonic map from predicted to observed CDF levels.
///
/// # Safety
/// `recal` must be a live handle; `out_interval` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_fit(
    recal: *const CalibreForecastSet,
    interpolation: CalibreInterpolation,
    out_interval: *mut *mut CalibreInterval,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_interval, "out_interval")?;
        let interp = match interpolation {
            CalibreInterpolation::Linear => Interpolation::Linear,
            CalibreInterpolation::Step => Interpolation::Step,
        };
        *dst = boxed(CalibreInterval(IntervalCalibrator::fit(&handle(recal, "recal")?.0, interp)?));
        Ok(())
    })
}

/// Evaluates the fitted map at a CDF level `p`; NaN for a null handle.
///
/// # Safety
/// `interval` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_eval(interval: *const CalibreInterval, p: f64) -> f64 {
    query(f64::NAN, || interval.as_ref().map(|c| c.0.map.eval(p)))
}

/// Summarizes each recalibrated forecast by its mean and standard deviation.
/// `out_skipped` (optional) receives the number of records dropped.
///
/// # Safety
/// Handles must be live; `out_set` must be writable; `out_skipped` may be null.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_apply(
    interval: *const CalibreInterval,
    set: *const CalibreForecastSet,
    out_set: *mut *mut CalibreForecastSet,
    out_skipped: *mut usize,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_set, "out_set")?;
        let applied = handle(interval, "interval")?.0.apply(&handle(set, "set")?.0)?;
        if let Some(s) = out_skipped.as_mut() {
            *s = applied.skipped;
        }
        *dst = boxed(CalibreForecastSet(applied.set));
        Ok(())
    })
}

/// Largest gap between expected and observed coverage on a held-out set,
/// over levels 0.05, 0.10, ..., 0.95.
///
/// # Safety
/// Handles must be live; `out_deviation` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_plot_deviation(
    interval: *const CalibreInterval,
    holdout: *const CalibreForecastSet,
    out_deviation: *mut f64,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_deviation, "out_deviation")?;
        *dst = handle(interval, "interval")?.0.plot(&handle(holdout, "holdout")?.0).max_abs_deviation;
        Ok(())
    })
}

/// Serializes the fitted map; release the string with [`calibre_string_free`].
///
/// # Safety
/// `interval` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_to_json(
    interval: *const CalibreInterval,
    out_json: *mut *mut c_char,
) -> CalibreStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        let cal = handle(interval, "interval")?.0.clone();
        json_out(Calibrator::Interval(cal).to_json_pretty(), dst)
    })
}

/// # Safety
/// `interval` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calibre_interval_free(interval: *mut CalibreInterval) {
    free(interval)
}

/// Writes the PIT values `Phi((y - mu) / sigma)` of a set into `out_pit`,
/// which must hold exactly the set's length.
///
/// # Safety
/// `set` must be live; `out_pit` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn calibre_pit(set: *const CalibreForecastSet, out_pit: *mut f64, len: usize) -> CalibreStatus {
    guard(|| {
        let set = &handle(set, "set")?.0;
        if len != set.len() {
            return Err(Error::Usage(format!("buffer length {len} != set length {}", set.len())).into());
        }
        slice_mut(out_pit, len, "out_pit")?.copy_from_slice(pit(set).values());
        Ok(())
    })
}

/// One-sample Kolmogorov-Smirnov test of PIT values against U(0, 1) at the
/// 5% level. Needs at least 10 values.
///
/// # Safety
/// `pit` must hold `len` readable doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn calibre_ks_uniformity(
    pit: *const f64,
    len: usize,
    out_statistic: *mut f64,
    out_pass: *mut bool,
) -> CalibreStatus {
    guard(|| {
        let stat = out(out_statistic, "out_statistic")?;
        let pass = out(out_pass, "out_pass")?;
        let sample = PitSample::new(slice(pit, len, "pit")?.to_vec())?;
        let r = ks_uniformity(&sample)?;
        *stat = r.statistic;
        *pass = r.pass_at_05;
        Ok(())
    })
}
