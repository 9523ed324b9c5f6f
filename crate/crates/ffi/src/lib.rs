//! C ABI over `msle`.
//!
//! Every fallible function returns an [`MsleStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! can be read with [`msle_last_error`]. Objects are opaque handles that
//! the caller releases with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msle::combinatorics::{enumerate_patterns, LinkPattern};
use msle::conformal::{make_parameters, DomainSpec};
use msle::loewner::{extract_driver, sample_chordal_sle, Curve, DrivingFunction};
use msle::multisle::{n_kappa, resample_step, MultiCurveState};
use msle::partition::{f_alpha_mc_83, BoundaryConfig};
use msle::Error;
use num_complex::Complex64;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsleStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter lies outside its admissible range.
    Bounds = 2,
    InvalidArgument = 3,
    /// A point lies outside its domain or is swallowed by a hull.
    Domain = 4,
    Numeric = 5,
    Geometry = 6,
    /// Lattice tracing or loop representation invariants.
    Lattice = 7,
    Statistics = 8,
    Io = 9,
    /// A buffer is too small; the required length was written.
    BufferTooSmall = 10,
    Panic = 11,
    Other = 12,
}

fn status_of(e: &Error) -> MsleStatus {
    match e {
        Error::Bounds { .. } => MsleStatus::Bounds,
        Error::InvalidArgument(_) | Error::NonPlanar(..) | Error::Config(_) | Error::Precondition(_) => {
            MsleStatus::InvalidArgument
        }
        Error::Domain(_) | Error::Swallowed { .. } | Error::NonSmoothBoundary(_) => MsleStatus::Domain,
        Error::Numeric(_) | Error::Singularity(_) | Error::NumericalBlowup(_) | Error::Resolution(_) => {
            MsleStatus::Numeric
        }
        Error::Geometry(_) | Error::DegenerateSegment(_) => MsleStatus::Geometry,
        Error::TracingInvariant(_) | Error::Representation(_) => MsleStatus::Lattice,
        Error::Statistics(_) | Error::DataQuality(_) | Error::Provider(_) => MsleStatus::Statistics,
        Error::Io(_) | Error::Json(_) => MsleStatus::Io,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), MsleStatus>) -> MsleStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsleStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            MsleStatus::Panic
        }
    }
}

fn fail(e: Error) -> MsleStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> MsleStatus {
    set_error(format!("{what} is null"));
    MsleStatus::NullPointer
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, MsleStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], MsleStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn pattern(text: *const c_char) -> Result<LinkPattern, MsleStatus> {
    if text.is_null() {
        return Err(null("pattern"));
    }
    let s = CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("pattern is not UTF-8".into());
        MsleStatus::InvalidArgument
    })?;
    s.parse().map_err(fail)
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn msle_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// A curve in the plane.
pub struct MsleCurve(Curve);

/// A driving function sampled on a time grid.
pub struct MsleDriver(DrivingFunction);

/// `N` disjoint curves in a domain with a link pattern.
pub struct MsleState(MultiCurveState);

/// Number of link patterns with `n` links.
///
/// # Safety
/// `count` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_count_patterns(n: usize, count: *mut u64) -> MsleStatus {
    guard(|| {
        let count = out(count, "count")?;
        *count = enumerate_patterns(n).map_err(fail)?.len() as u64;
        Ok(())
    })
}

/// `n_kappa` for `kappa` in `(4, 8)`.
///
/// # Safety
/// `value` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_n_kappa(kappa: f64, value: *mut usize) -> MsleStatus {
    guard(|| {
        let value = out(value, "value")?;
        *value = n_kappa(kappa).map_err(fail)?;
        Ok(())
    })
}

/// Chordal SLE from 0 to infinity in the upper half-plane up to capacity
/// `t_total`, on a grid of step `dt`.
///
/// # Safety
/// `curve` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_sample_chordal_sle(
    kappa: f64,
    t_total: f64,
    dt: f64,
    seed: u64,
    curve: *mut *mut MsleCurve,
) -> MsleStatus {
    guard(|| {
        let slot = out(curve, "curve")?;
        let p = make_parameters(kappa).map_err(fail)?;
        let c = sample_chordal_sle(&p, t_total, dt, seed).map_err(fail)?;
        *slot = Box::into_raw(Box::new(MsleCurve(c)));
        Ok(())
    })
}

/// Builds a curve from coordinate arrays of length `n`.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable doubles; `curve` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_curve_new(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    curve: *mut *mut MsleCurve,
) -> MsleStatus {
    guard(|| {
        let slot = out(curve, "curve")?;
        let (xs, ys) = (slice(xs, n, "xs")?, slice(ys, n, "ys")?);
        let pts = xs.iter().zip(ys).map(|(&x, &y)| Complex64::new(x, y)).collect();
        *slot = Box::into_raw(Box::new(MsleCurve(Curve::new(pts).map_err(fail)?)));
        Ok(())
    })
}

/// Number of points of a curve (0 for null).
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn msle_curve_len(curve: *const MsleCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the curve into `xs` and `ys`, which hold `capacity` doubles each.
/// Fails with `BufferTooSmall` when they cannot hold every point.
///
/// # Safety
/// `curve` must be a live handle; `xs` and `ys` must be writable for
/// `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn msle_curve_points(
    curve: *const MsleCurve,
    xs: *mut f64,
    ys: *mut f64,
    capacity: usize,
) -> MsleStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        if capacity < c.0.len() {
            set_error(format!("need room for {} points, got {capacity}", c.0.len()));
            return Err(MsleStatus::BufferTooSmall);
        }
        if xs.is_null() || ys.is_null() {
            return Err(null("output buffer"));
        }
        for (k, p) in c.0.points.iter().enumerate() {
            *xs.add(k) = p.re;
            *ys.add(k) = p.im;
        }
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msle_curve_free(curve: *mut MsleCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Driver of a curve in the upper half-plane by unzipping at most
/// `n_steps` points.
///
/// # Safety
/// `curve` must be a live handle; `driver` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_extract_driver(
    curve: *const MsleCurve,
    n_steps: usize,
    driver: *mut *mut MsleDriver,
) -> MsleStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        let slot = out(driver, "driver")?;
        *slot = Box::into_raw(Box::new(MsleDriver(extract_driver(&c.0, n_steps).map_err(fail)?)));
        Ok(())
    })
}

/// Number of grid times of a driver (0 for null).
///
/// # Safety
/// `driver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn msle_driver_len(driver: *const MsleDriver) -> usize {
    driver.as_ref().map_or(0, |d| d.0.times.len())
}

/// Copies times and values into buffers of `capacity` doubles each.
///
/// # Safety
/// `driver` must be a live handle; `times` and `values` must be writable
/// for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn msle_driver_values(
    driver: *const MsleDriver,
    times: *mut f64,
    values: *mut f64,
    capacity: usize,
) -> MsleStatus {
    guard(|| {
        let d = driver.as_ref().ok_or_else(|| null("driver"))?;
        let n = d.0.times.len();
        if capacity < n {
            set_error(format!("need room for {n} values, got {capacity}"));
            return Err(MsleStatus::BufferTooSmall);
        }
        if times.is_null() || values.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(d.0.times.as_ptr(), times, n);
        ptr::copy_nonoverlapping(d.0.values.as_ptr(), values, n);
        Ok(())
    })
}

/// # Safety
/// `driver` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msle_driver_free(driver: *mut MsleDriver) {
    if !driver.is_null() {
        drop(Box::from_raw(driver));
    }
}

/// Boundary Poisson kernel of the `width x height` rectangle between
/// boundary points `(x1, y1)` and `(x2, y2)`.
///
/// # Safety
/// `value` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_poisson_kernel_rectangle(
    width: f64,
    height: f64,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    value: *mut f64,
) -> MsleStatus {
    guard(|| {
        let value = out(value, "value")?;
        let d = DomainSpec::rectangle(width, height, vec![]).map_err(fail)?;
        *value = d.poisson_kernel(Complex64::new(x1, y1), Complex64::new(x2, y2)).map_err(fail)?;
        Ok(())
    })
}

/// Monte Carlo estimate of `f_alpha` at `kappa = 8/3` for increasing real
/// points `x[0..n]` and a pattern written `N;a-b,...`.
///
/// # Safety
/// `x` must point to `n` doubles, `pattern` to a nul-terminated string,
/// and `mean`, `stderr_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_f_alpha_mc(
    x: *const f64,
    n: usize,
    pattern_text: *const c_char,
    samples: usize,
    seed: u64,
    mean: *mut f64,
    stderr_out: *mut f64,
) -> MsleStatus {
    guard(|| {
        let (mean, se) = (out(mean, "mean")?, out(stderr_out, "stderr")?);
        let cfg = BoundaryConfig::new(slice(x, n, "x")?.to_vec()).map_err(fail)?;
        let alpha = pattern(pattern_text)?;
        let est = f_alpha_mc_83(&cfg, &alpha, samples, seed).map_err(fail)?;
        *mean = est.mean;
        *se = est.stderr;
        Ok(())
    })
}

/// Curves hugging the boundary of the `width x height` rectangle, one
/// per link, with marks given as `n_marks` coordinate pairs in
/// counterclockwise order.
///
/// # Safety
/// `mark_x`, `mark_y` must point to `n_marks` doubles, `pattern` to a
/// nul-terminated string, and `state` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_state_hugging_rectangle(
    kappa: f64,
    width: f64,
    height: f64,
    mark_x: *const f64,
    mark_y: *const f64,
    n_marks: usize,
    pattern_text: *const c_char,
    offset: f64,
    spacing: f64,
    state: *mut *mut MsleState,
) -> MsleStatus {
    guard(|| {
        let slot = out(state, "state")?;
        let (mx, my) = (slice(mark_x, n_marks, "mark_x")?, slice(mark_y, n_marks, "mark_y")?);
        let marks = mx.iter().zip(my).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let p = make_parameters(kappa).map_err(fail)?;
        let domain = DomainSpec::rectangle(width, height, marks).map_err(fail)?;
        let s = MultiCurveState::hugging(p, pattern(pattern_text)?, domain, offset, spacing).map_err(fail)?;
        *slot = Box::into_raw(Box::new(MsleState(s)));
        Ok(())
    })
}

/// Number of curves (0 for null).
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn msle_state_n_curves(state: *const MsleState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_curves())
}

/// Signed area between curve `j` and the chord joining its ends.
///
/// # Safety
/// `state` must be a live handle; `area` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_state_signed_area(state: *const MsleState, j: usize, area: *mut f64) -> MsleStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let area = out(area, "area")?;
        if j >= s.0.n_curves() {
            return Err(fail(Error::InvalidArgument(format!("curve index {j} out of range"))));
        }
        *area = s.0.signed_area(j);
        Ok(())
    })
}

/// Copy of curve `j` as a new curve handle.
///
/// # Safety
/// `state` must be a live handle; `curve` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msle_state_curve(state: *const MsleState, j: usize, curve: *mut *mut MsleCurve) -> MsleStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let slot = out(curve, "curve")?;
        let c = s.0.curves.get(j).ok_or_else(|| fail(Error::InvalidArgument(format!("curve index {j} out of range"))))?;
        *slot = Box::into_raw(Box::new(MsleCurve(c.clone())));
        Ok(())
    })
}

/// One resampling step of curve `j`, in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msle_state_resample(state: *mut MsleState, j: usize, seed: u64) -> MsleStatus {
    guard(|| {
        let s = state.as_mut().ok_or_else(|| null("state"))?;
        s.0 = resample_step(&s.0, j, seed).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msle_state_free(state: *mut MsleState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}
