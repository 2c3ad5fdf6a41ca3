//! C ABI for `tdual`.
//!
//! Systems and operators are opaque heap handles created by `td_*_new` and
//! released by the matching `td_*_free`. Every fallible call returns a
//! [`TdStatus`]; on failure a message is available from
//! [`td_last_error_message`] on the same thread until the next failing call.
//! `-inf` results (nilpotent operators, zero t-entropy mass) are reported as
//! IEEE negative infinity.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdual::duality;
use tdual::spectral;
use tdual::tentropy::{self, LegendreOptions};
use tdual::{Error, FiniteSystem, Measure, Potential, TransferOperator};

/// Opaque handle to a finite dynamical system.
pub struct TdSystem {
    inner: FiniteSystem,
}

/// Opaque handle to a transfer operator over a system.
pub struct TdOperator {
    inner: TransferOperator,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Support = 4,
    Positivity = 5,
    Normalization = 6,
    NotInvariant = 7,
    Reducible = 8,
    Convergence = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> TdStatus {
    match err {
        Error::Dimension { .. } => TdStatus::Dimension,
        Error::Support { .. } => TdStatus::Support,
        Error::Positivity { .. } | Error::NegativeWeight { .. } => TdStatus::Positivity,
        Error::Normalization { .. } => TdStatus::Normalization,
        Error::NotInvariant(_) => TdStatus::NotInvariant,
        Error::ReducibleOperator => TdStatus::Reducible,
        Error::Convergence { .. } => TdStatus::Convergence,
        _ => TdStatus::InvalidArgument,
    }
}

struct Fail(TdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TdStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TdStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn operator<'a>(op: *const TdOperator) -> Result<&'a TransferOperator, Fail> {
    op.as_ref().map(|o| &o.inner).ok_or_else(|| null("op"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn check_len(op: &TransferOperator, len: usize) -> Result<(), Fail> {
    if len == op.n_points() {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: op.n_points(),
            got: len,
        }
        .into())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates the system `x -> alpha[x]` on `n` points.
///
/// # Safety
/// `alpha` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_system_new(
    alpha: *const usize,
    n: usize,
    out: *mut *mut TdSystem,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = FiniteSystem::new(slice(alpha, n, "alpha")?.to_vec())?;
        out.write(Box::into_raw(Box::new(TdSystem { inner: sys })));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from [`td_system_new`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_system_free(sys: *mut TdSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of points of a system, or 0 for NULL.
///
/// # Safety
/// `sys` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_system_n_points(sys: *const TdSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.n_points())
}

/// Creates an operator from `len` triplets `(xs[i], ys[i], values[i])`.
/// The system is copied; `sys` stays owned by the caller.
///
/// # Safety
/// The three arrays must hold `len` values; `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_operator_new(
    sys: *const TdSystem,
    xs: *const usize,
    ys: *const usize,
    values: *const f64,
    len: usize,
    out: *mut *mut TdOperator,
) -> TdStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("sys"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = slice(xs, len, "xs")?;
        let ys = slice(ys, len, "ys")?;
        let values = slice(values, len, "values")?;
        let triplets: Vec<(usize, usize, f64)> =
            (0..len).map(|i| (xs[i], ys[i], values[i])).collect();
        let op = TransferOperator::new(sys.inner.clone(), &triplets)?;
        out.write(Box::into_raw(Box::new(TdOperator { inner: op })));
        Ok(())
    })
}

/// # Safety
/// `op` must come from [`td_operator_new`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_operator_free(op: *mut TdOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Log spectral radius of the operator twisted by `phi`.
///
/// # Safety
/// `phi` must hold `n` values; `out_lambda` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_spectral_potential(
    op: *const TdOperator,
    phi: *const f64,
    n: usize,
    tol: f64,
    out_lambda: *mut f64,
) -> TdStatus {
    guard(|| {
        let a = operator(op)?;
        check_len(a, n)?;
        let phi = Potential::new(slice(phi, n, "phi")?.to_vec())?;
        let r = spectral::spectral_potential(a, &phi, tol)?;
        write(out_lambda, r.lambda.to_f64(), "out_lambda")
    })
}

/// Equilibrium measure at `phi`, written to `out_weights` (`n` values).
///
/// # Safety
/// `phi` and `out_weights` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn td_gibbs_gradient(
    op: *const TdOperator,
    phi: *const f64,
    n: usize,
    tol: f64,
    out_weights: *mut f64,
) -> TdStatus {
    guard(|| {
        let a = operator(op)?;
        check_len(a, n)?;
        let phi = Potential::new(slice(phi, n, "phi")?.to_vec())?;
        let out = slice_mut(out_weights, n, "out_weights")?;
        let mu = spectral::gibbs_gradient(a, &phi, tol)?;
        out.copy_from_slice(mu.weights());
        Ok(())
    })
}

/// t-entropy by minimizing `lambda(phi) - mu[phi]`. When `out_witness` is
/// not NULL it receives the minimizing (or divergence) potential, `n` values.
///
/// # Safety
/// `mu` must hold `n` values; `out_witness` is NULL or holds `n` values.
#[no_mangle]
pub unsafe extern "C" fn td_tau_legendre(
    op: *const TdOperator,
    mu: *const f64,
    n: usize,
    out_tau: *mut f64,
    out_witness: *mut f64,
) -> TdStatus {
    guard(|| {
        let a = operator(op)?;
        check_len(a, n)?;
        let mu = Measure::new(slice(mu, n, "mu")?.to_vec())?;
        let r = tentropy::tau_legendre(a, &mu, &LegendreOptions::default())?;
        if !out_witness.is_null() {
            let w = slice_mut(out_witness, n, "out_witness")?;
            match &r.witness_phi {
                Some(phi) => w.copy_from_slice(phi.values()),
                None => w.fill(0.0),
            }
        }
        write(out_tau, r.tau.to_f64(), "out_tau")
    })
}

/// t-entropy by the partition formula over the point partition, `n <= n_max`.
///
/// # Safety
/// `mu` must hold `n` values; `out_tau` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_tau_direct(
    op: *const TdOperator,
    mu: *const f64,
    n: usize,
    n_max: usize,
    out_tau: *mut f64,
) -> TdStatus {
    guard(|| {
        let a = operator(op)?;
        check_len(a, n)?;
        let mu = Measure::new(slice(mu, n, "mu")?.to_vec())?;
        let r = tentropy::tau_direct(a, &mu, n_max, &[])?;
        write(out_tau, r.tau.to_f64(), "out_tau")
    })
}

/// `lambda(phi) - tau(mu*) - mu*[phi]` at the equilibrium measure `mu*`.
/// `out_pass` (may be NULL) receives 1 when the gap is within `tol`, else 0.
///
/// # Safety
/// `phi` must hold `n` values; `out_gap` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_duality_gap(
    op: *const TdOperator,
    phi: *const f64,
    n: usize,
    tol: f64,
    out_gap: *mut f64,
    out_pass: *mut i32,
) -> TdStatus {
    guard(|| {
        let a = operator(op)?;
        check_len(a, n)?;
        let phi = Potential::new(slice(phi, n, "phi")?.to_vec())?;
        let r = duality::duality_check(a, &phi, tol)?;
        if !out_pass.is_null() {
            out_pass.write(i32::from(r.pass));
        }
        write(out_gap, r.gap, "out_gap")
    })
}
