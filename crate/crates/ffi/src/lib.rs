//! C ABI for the `deadbeat` crate.
//!
//! Every entry point returns a [`DeadbeatStatus`]. On failure a message is
//! kept per thread and can be fetched with [`deadbeat_last_error_message`].
//! Systems and trackers are opaque handles owned by the caller and released
//! with their `_free` functions. Matrices are passed row-major.
//!
//! Panics never cross the boundary; they surface as
//! [`DeadbeatStatus::Panic`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use deadbeat::linear::{self, Form, GainAlgorithm, LinearSystem, LinearTracker};
use deadbeat::nonlinear::{ControlledSystem, HomogeneousSystem, PositiveSystem};
use deadbeat::{Error, Tolerance};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeadbeatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    SingularA = 4,
    Uncontrollable = 5,
    UnsupportedInputWidth = 6,
    NotControllable = 7,
    DomainViolation = 8,
    Diverged = 9,
    NotNilpotent = 10,
    Internal = 11,
    Panic = 12,
}

impl From<&Error> for DeadbeatStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => Self::InvalidInput,
            Error::NumericalFailure(_) => Self::NumericalFailure,
            Error::SingularA { .. } => Self::SingularA,
            Error::Uncontrollable(_) => Self::Uncontrollable,
            Error::UnsupportedInputWidth(_) => Self::UnsupportedInputWidth,
            Error::NotControllable => Self::NotControllable,
            Error::DomainViolation(_) => Self::DomainViolation,
            Error::DivergedAtStep(_) => Self::Diverged,
            Error::NotNilpotent(_) => Self::NotNilpotent,
            Error::Internal(_) => Self::Internal,
        }
    }
}

/// Plant form: `x⁺ = A(x + Bu)` or `x⁺ = Ax + Bu`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeadbeatForm {
    Factored = 0,
    Standard = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeadbeatDemo {
    Homogeneous = 0,
    Positive = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadbeatTolerance {
    pub rank_rel: f64,
    pub residual_rel: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadbeatReport {
    pub pbh_pass: bool,
    pub geometric_pass: bool,
    pub has_failing_eigenvalue: bool,
    pub failing_re: f64,
    pub failing_im: f64,
    /// Deadbeat horizon `p` of the subspace chain; 0 if it never fills ℝⁿ.
    pub horizon: usize,
}

/// Opaque linear system handle.
pub struct DeadbeatSystem {
    inner: LinearSystem,
}

/// Opaque set-intersection tracker handle.
pub struct DeadbeatTracker {
    inner: LinearTracker,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(DeadbeatStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(DeadbeatStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DeadbeatStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(DeadbeatStatus::InvalidInput, msg.into())
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> DeadbeatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DeadbeatStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DeadbeatStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn tolerance(tol: *const DeadbeatTolerance) -> Result<Tolerance, Fail> {
    match tol.as_ref() {
        None => Ok(Tolerance::default()),
        Some(t) => Ok(Tolerance::new(t.rank_rel, t.residual_rel)?),
    }
}

/// Default tolerances.
#[no_mangle]
pub extern "C" fn deadbeat_tolerance_default() -> DeadbeatTolerance {
    let t = Tolerance::default();
    DeadbeatTolerance {
        rank_rel: t.rank_rel,
        residual_rel: t.residual_rel,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in bytes,
/// excluding the terminator; empty after a successful call.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a system from row-major `A` (`n × n`) and `B` (`n × m`).
///
/// # Safety
/// `a` must point to `n*n` doubles, `b` to `n*m` doubles, `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_system_new(
    a: *const f64,
    b: *const f64,
    n: usize,
    m: usize,
    form: DeadbeatForm,
    out: *mut *mut DeadbeatSystem,
) -> DeadbeatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (nn, nm) = n
            .checked_mul(n)
            .zip(n.checked_mul(m))
            .ok_or_else(|| invalid("dimensions overflow"))?;
        let a = DMatrix::from_row_slice(n, n, input(a, nn, "a")?);
        let b = DMatrix::from_row_slice(n, m, input(b, nm, "b")?);
        let form = match form {
            DeadbeatForm::Factored => Form::Factored,
            DeadbeatForm::Standard => Form::Standard,
        };
        let inner = LinearSystem::new(a, b, form)?;
        *out = Box::into_raw(Box::new(DeadbeatSystem { inner }));
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle from [`deadbeat_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_system_free(sys: *mut DeadbeatSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// State dimension `n`; 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_system_state_dim(sys: *const DeadbeatSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.state_dim())
}

/// Input dimension `m`; 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_system_input_dim(sys: *const DeadbeatSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.input_dim())
}

/// PBH and subspace-chain controllability tests. `tol` may be null for
/// defaults.
///
/// # Safety
/// Pointers must be null or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_check(
    sys: *const DeadbeatSystem,
    tol: *const DeadbeatTolerance,
    out: *mut DeadbeatReport,
) -> DeadbeatStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let tol = tolerance(tol)?;
        let report = linear::check_controllability(sys, &tol)?;
        let chain = linear::subspace_chain(sys, sys.state_dim(), &tol)?;
        let (re, im) = report.failing_eigenvalue.unwrap_or((0.0, 0.0));
        *out = DeadbeatReport {
            pbh_pass: report.pbh_pass,
            geometric_pass: report.geometric_pass,
            has_failing_eigenvalue: report.failing_eigenvalue.is_some(),
            failing_re: re,
            failing_im: im,
            horizon: chain.horizon().unwrap_or(0),
        };
        Ok(())
    })
}

/// Scalar-input deadbeat gain. Writes `K₂` and `K = K₂A` (each `n` doubles)
/// and the nilpotency residual. `k` and `residual` may be null.
///
/// # Safety
/// `k2` (and `k` if non-null) must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_gain(
    sys: *const DeadbeatSystem,
    dual: bool,
    tol: *const DeadbeatTolerance,
    k2: *mut f64,
    k: *mut f64,
    len: usize,
    residual: *mut f64,
) -> DeadbeatStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        if len != sys.state_dim() {
            return Err(invalid(format!(
                "gain buffers have length {len}, expected n = {}",
                sys.state_dim()
            )));
        }
        let k2_out = output(k2, len, "k2")?;
        let tol = tolerance(tol)?;
        let algo = if dual {
            GainAlgorithm::Dual
        } else {
            GainAlgorithm::Primal
        };
        let g = linear::compute_gain(sys, algo, &tol)?;
        k2_out.copy_from_slice(g.k2.as_slice());
        if !k.is_null() {
            output(k, len, "k")?.copy_from_slice(g.k.as_slice());
        }
        if let Some(r) = residual.as_mut() {
            *r = g.nilpotency_residual;
        }
        Ok(())
    })
}

/// Builds the set-intersection tracker for a factored-form system.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_tracker_new(
    sys: *const DeadbeatSystem,
    tol: *const DeadbeatTolerance,
    out: *mut *mut DeadbeatTracker,
) -> DeadbeatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        let inner = LinearTracker::from_system(sys, &tolerance(tol)?)?;
        *out = Box::into_raw(Box::new(DeadbeatTracker { inner }));
        Ok(())
    })
}

/// Releases a tracker. Null is ignored.
///
/// # Safety
/// `tracker` must be null or a handle from [`deadbeat_tracker_new`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_tracker_free(tracker: *mut DeadbeatTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

/// Deadbeat horizon `p`; 0 for a null handle.
///
/// # Safety
/// `tracker` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_tracker_horizon(tracker: *const DeadbeatTracker) -> usize {
    tracker.as_ref().map_or(0, |t| t.inner.horizon())
}

/// One tracker step `x̂⁺ = g(x̂, x)`; all buffers hold `n` doubles.
///
/// # Safety
/// `xhat`, `x` must be readable and `out` writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_tracker_step(
    tracker: *const DeadbeatTracker,
    xhat: *const f64,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> DeadbeatStatus {
    guard(|| {
        let t = &tracker.as_ref().ok_or_else(|| null("tracker"))?.inner;
        let dim = t.system().state_dim();
        if n != dim {
            return Err(invalid(format!("state length {n}, expected {dim}")));
        }
        let xhat = DVector::from_column_slice(input(xhat, n, "xhat")?);
        let x = DVector::from_column_slice(input(x, n, "x")?);
        let next = t.step(&xhat, &x)?;
        output(out, n, "out")?.copy_from_slice(next.as_slice());
        Ok(())
    })
}

fn demo(which: DeadbeatDemo) -> &'static dyn ControlledSystem {
    match which {
        DeadbeatDemo::Homogeneous => &HomogeneousSystem,
        DeadbeatDemo::Positive => &PositiveSystem,
    }
}

unsafe fn state3(p: *const f64, what: &str) -> Result<[f64; 3], Fail> {
    let s = input(p, 3, what)?;
    Ok([s[0], s[1], s[2]])
}

/// Closed-form tracker step of a nonlinear demo plant (3 doubles each).
///
/// # Safety
/// `xhat`, `x` must be readable and `out` writable for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_demo_step(
    which: DeadbeatDemo,
    xhat: *const f64,
    x: *const f64,
    out: *mut f64,
) -> DeadbeatStatus {
    guard(|| {
        let next = demo(which).tracker_step(&state3(xhat, "xhat")?, &state3(x, "x")?)?;
        output(out, 3, "out")?.copy_from_slice(&next);
        Ok(())
    })
}

/// Plant map `f(x)` of a nonlinear demo.
///
/// # Safety
/// `x` must be readable and `out` writable for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_demo_f(
    which: DeadbeatDemo,
    x: *const f64,
    out: *mut f64,
) -> DeadbeatStatus {
    guard(|| {
        let next = demo(which).f(&state3(x, "x")?)?;
        output(out, 3, "out")?.copy_from_slice(&next);
        Ok(())
    })
}

/// Feedback `u = κ(x̂, x)` of a nonlinear demo.
///
/// # Safety
/// `xhat`, `x` must be readable for 3 doubles; `u` writable.
#[no_mangle]
pub unsafe extern "C" fn deadbeat_demo_kappa(
    which: DeadbeatDemo,
    xhat: *const f64,
    x: *const f64,
    u: *mut f64,
) -> DeadbeatStatus {
    guard(|| {
        let u = u.as_mut().ok_or_else(|| null("u"))?;
        *u = demo(which).kappa(&state3(xhat, "xhat")?, &state3(x, "x")?)?;
        Ok(())
    })
}
