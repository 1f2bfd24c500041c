//! C ABI over the `roadspeed` library.
//!
//! Every function returns an [`RsStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be copied out with
//! [`rs_last_error_message`]. A [`RsSpeedProblem`] is an opaque handle owned
//! by the caller and released with [`rs_speed_problem_free`]. Handles are
//! immutable after construction, so one handle may be shared by several
//! threads.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use roadspeed::asymptotics::{sweep_r, RescaleTarget};
use roadspeed::dispersion::{c_min_crossing, threshold_d, upper_bound_speed};
use roadspeed::{
    Error, ExchangeSpec, GridConfig, KernelShape, ModelParams, SpeedProblem, SpeedRegime,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    /// Null pointer or out-of-range argument.
    InvalidArgument = 1,
    /// Invalid parameters or kernels (CLI exit code 2).
    ConfigError = 2,
    /// Solver, bracketing or simulation failure (CLI exit code 3).
    NumericalFailure = 3,
    ValidationFailure = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RsModelParams {
    /// Field diffusivity `d`.
    pub d_field: f64,
    /// Road diffusivity `D`.
    pub d_road: f64,
    /// `f'(0)`.
    pub growth: f64,
    pub mu_bar: f64,
    pub nu_bar: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsKernelShape {
    Box = 0,
    Triangle = 1,
    RaisedCosine = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RsKernel {
    pub shape: RsKernelShape,
    pub half_width: f64,
    pub mass: f64,
    /// Long-range scale `R >= 1`; the kernel is `k(y / R) / R`.
    pub range_scale: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsRescaleTarget {
    Mu = 0,
    Nu = 1,
    Both = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RsSpeedResult {
    pub c_star: f64,
    /// NaN for the subcritical shortcut.
    pub lambda_star: f64,
    /// 1 when `D <= 2d` and `c* = c_K` without a search.
    pub subcritical: i32,
    pub gap_at_cstar: f64,
    pub iterations: u32,
    pub bracket_lower: f64,
    pub bracket_upper: f64,
}

/// Opaque handle: model, kernels and the discretized transverse problem.
pub struct RsSpeedProblem {
    inner: SpeedProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsStatus {
    match e.exit_code() {
        2 => RsStatus::ConfigError,
        4 => RsStatus::ValidationFailure,
        _ => RsStatus::NumericalFailure,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), RsStatus>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RsStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside roadspeed".into());
            RsStatus::Panic
        }
    }
}

fn fail(e: Error) -> RsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> RsStatus {
    set_error(format!("null pointer: {what}"));
    RsStatus::InvalidArgument
}

unsafe fn read<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, RsStatus> {
    unsafe { ptr.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(ptr: *mut T, what: &str, value: T) -> Result<(), RsStatus> {
    match unsafe { ptr.as_mut() } {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(null(what)),
    }
}

fn params_from(p: &RsModelParams) -> Result<ModelParams, RsStatus> {
    ModelParams::new(p.d_field, p.d_road, p.growth, p.mu_bar, p.nu_bar).map_err(fail)
}

fn kernel_from(k: &RsKernel) -> Result<ExchangeSpec, RsStatus> {
    let shape = match k.shape {
        RsKernelShape::Box => KernelShape::Box,
        RsKernelShape::Triangle => KernelShape::Triangle,
        RsKernelShape::RaisedCosine => KernelShape::RaisedCosine,
    };
    let spec = ExchangeSpec {
        shape,
        half_width: k.half_width,
        mass: k.mass,
        range_scale: k.range_scale,
    };
    spec.validate().map_err(fail)?;
    Ok(spec)
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length plus
/// one, or 0 when there is no pending error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Classical KPP speed `2 sqrt(d a)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_c_kpp(params: *const RsModelParams, out: *mut f64) -> RsStatus {
    guard(|| {
        let p = params_from(unsafe { read(params, "params") }?)?;
        unsafe { write(out, "out", p.c_kpp()) }
    })
}

/// Threshold road diffusivity `d (2 + mu_bar / a)`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_threshold_d(params: *const RsModelParams, out: *mut f64) -> RsStatus {
    guard(|| {
        let p = params_from(unsafe { read(params, "params") }?)?;
        unsafe { write(out, "out", threshold_d(&p)) }
    })
}

/// `D sqrt(a / (D - d))`; fails with `RS_STATUS_NUMERICAL_FAILURE` when `D <= d`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_upper_bound_speed(
    params: *const RsModelParams,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        let p = params_from(unsafe { read(params, "params") }?)?;
        let v = upper_bound_speed(&p).map_err(fail)?;
        unsafe { write(out, "out", v) }
    })
}

/// Speed where `lambda1+ = lambda2-`; only defined above the threshold.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_c_min_crossing(
    params: *const RsModelParams,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        let p = params_from(unsafe { read(params, "params") }?)?;
        let v = c_min_crossing(&p).map_err(fail)?;
        unsafe { write(out, "out", v) }
    })
}

/// Builds a speed problem. `spacing <= 0` selects the default grid spacing.
///
/// # Safety
/// Pointers must be null or valid; `*out` receives a handle to free with
/// `rs_speed_problem_free`.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_new(
    params: *const RsModelParams,
    mu: *const RsKernel,
    nu: *const RsKernel,
    spacing: f64,
    out: *mut *mut RsSpeedProblem,
) -> RsStatus {
    guard(|| {
        let p = params_from(unsafe { read(params, "params") }?)?;
        let mu = kernel_from(unsafe { read(mu, "mu") }?)?;
        let nu = kernel_from(unsafe { read(nu, "nu") }?)?;
        let mut cfg = GridConfig::default();
        if spacing > 0.0 {
            cfg.spacing = spacing;
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = SpeedProblem::new(&p, &mu, &nu, &cfg).map_err(fail)?;
        unsafe { *out = Box::into_raw(Box::new(RsSpeedProblem { inner })) };
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `problem` must come from `rs_speed_problem_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_free(problem: *mut RsSpeedProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// `Psi2(lambda, c) = int nu phi`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_psi2(
    problem: *const RsSpeedProblem,
    lambda: f64,
    c: f64,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        let h = unsafe { read(problem, "problem") }?;
        let v = h.inner.psi2(lambda, c).map_err(fail)?;
        unsafe { write(out, "out", v) }
    })
}

/// Intersection gap `G(c)`; nonnegative iff the curves meet at speed `c`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_gap(
    problem: *const RsSpeedProblem,
    c: f64,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        let h = unsafe { read(problem, "problem") }?;
        let v = h.inner.intersection_gap(c).map_err(fail)?.value;
        unsafe { write(out, "out", v) }
    })
}

/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_find_cstar(
    problem: *const RsSpeedProblem,
    out: *mut RsSpeedResult,
) -> RsStatus {
    guard(|| {
        let h = unsafe { read(problem, "problem") }?;
        let r = h.inner.find_cstar().map_err(fail)?;
        let result = RsSpeedResult {
            c_star: r.c_star,
            lambda_star: r.lambda_star.unwrap_or(f64::NAN),
            subcritical: (r.regime == SpeedRegime::SubcriticalDLe2d) as i32,
            gap_at_cstar: r.gap_at_cstar,
            iterations: r.iterations as u32,
            bracket_lower: r.bracket.0,
            bracket_upper: r.bracket.1,
        };
        unsafe { write(out, "out", result) }
    })
}

/// `c*(R)` for each of the `count` scales, written to `speeds`.
///
/// # Safety
/// `scales` and `speeds` must point to `count` readable / writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_speed_problem_sweep(
    problem: *const RsSpeedProblem,
    which: RsRescaleTarget,
    scales: *const f64,
    count: usize,
    speeds: *mut f64,
) -> RsStatus {
    guard(|| {
        let h = unsafe { read(problem, "problem") }?;
        if scales.is_null() || speeds.is_null() || count == 0 {
            return Err(null("scales/speeds"));
        }
        let scales = unsafe { std::slice::from_raw_parts(scales, count) };
        let which = match which {
            RsRescaleTarget::Mu => RescaleTarget::Mu,
            RsRescaleTarget::Nu => RescaleTarget::Nu,
            RsRescaleTarget::Both => RescaleTarget::Both,
        };
        let p = &h.inner;
        let s = sweep_r(&p.params, &p.mu, &p.nu, which, scales, &p.cfg).map_err(fail)?;
        let out = unsafe { std::slice::from_raw_parts_mut(speeds, count) };
        out.copy_from_slice(&s.speeds);
        Ok(())
    })
}
