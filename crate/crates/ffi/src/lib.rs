//! C ABI over `ngstate`. States are opaque handles; every call returns an
//! [`NgsStatus`] and writes results through out-pointers. The message of the
//! last failure on the calling thread is available from [`ngs_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ngstate::densmat::{classify_regime, ln_d, peak_fit, Regime};
use ngstate::observables::{c4_ratio, entropy_per_dof, purity};
use ngstate::statemap::{x_from_c4, ReducedState};
use ngstate::wigner::{ln_w, WignerSettings};
use ngstate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidConfig = 3,
    Unreachable = 4,
    Regime = 5,
    NotConverged = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgsRegime {
    Monotone = 0,
    Peaked = 1,
}

/// Opaque reduced state `(n, x)`.
pub struct NgsState {
    inner: ReducedState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NgsStatus {
    match e {
        Error::Domain { .. } | Error::HeisenbergViolation { .. } | Error::NonPositiveA { .. } => {
            NgsStatus::Domain
        }
        Error::InvalidConfig(_) => NgsStatus::InvalidConfig,
        Error::Unreachable { .. } => NgsStatus::Unreachable,
        Error::Regime | Error::AsymptoticRegimeViolation { .. } => NgsStatus::Regime,
        Error::NotConverged { .. } => NgsStatus::NotConverged,
        Error::QuadratureNonPositive { .. } | Error::NoRoot(_) => NgsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NgsStatus>) -> NgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NgsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside ngstate".into());
            NgsStatus::Panic
        }
    }
}

fn check<T>(r: ngstate::Result<T>) -> Result<T, NgsStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> NgsStatus {
    set_error(format!("{what} is null"));
    NgsStatus::NullPointer
}

unsafe fn state_ref<'a>(s: *const NgsState) -> Result<&'a ReducedState, NgsStatus> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("state"))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), NgsStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed(st: ReducedState) -> *mut NgsState {
    Box::into_raw(Box::new(NgsState { inner: st }))
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ngs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ngs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ngs_state_new(n: f64, x: f64, out: *mut *mut NgsState) -> NgsStatus {
    guard(|| {
        let st = check(ReducedState::new(n, x))?;
        write(out, boxed(st), "out")
    })
}

/// State at occupation `n` whose `C4/2F^2` equals `c4_ratio`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ngs_state_from_c4(
    n: f64,
    c4_ratio: f64,
    out: *mut *mut NgsState,
) -> NgsStatus {
    guard(|| {
        let x = check(x_from_c4(n, c4_ratio))?;
        let st = check(ReducedState::new(n, x))?;
        write(out, boxed(st), "out")
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ngs_state_free(state: *mut NgsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `n` and `x` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ngs_state_params(
    state: *const NgsState,
    n: *mut f64,
    x: *mut f64,
) -> NgsStatus {
    guard(|| {
        let st = state_ref(state)?;
        if !n.is_null() {
            n.write(st.n());
        }
        if !x.is_null() {
            x.write(st.x());
        }
        Ok(())
    })
}

/// `C4 / 2F^2`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngs_c4_ratio(state: *const NgsState, out: *mut f64) -> NgsStatus {
    guard(|| write(out, c4_ratio(state_ref(state)?), "out"))
}

/// Purity per degree of freedom and its ratio to the Gaussian value; either out-pointer may be NULL.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ngs_purity(
    state: *const NgsState,
    p: *mut f64,
    ratio: *mut f64,
) -> NgsStatus {
    guard(|| {
        let r = check(purity(state_ref(state)?))?;
        if !p.is_null() {
            p.write(r.p);
        }
        if !ratio.is_null() {
            ratio.write(r.ratio);
        }
        Ok(())
    })
}

/// Entropy per degree of freedom, which depends on `n` only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ngs_entropy_per_dof(n: f64, out: *mut f64) -> NgsStatus {
    guard(|| write(out, check(entropy_per_dof(n))?, "out"))
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngs_regime(state: *const NgsState, out: *mut NgsRegime) -> NgsStatus {
    guard(|| {
        let r = match classify_regime(state_ref(state)?) {
            Regime::Monotone => NgsRegime::Monotone,
            Regime::Peaked => NgsRegime::Peaked,
        };
        write(out, r, "out")
    })
}

/// `(1/N) ln d` at the scaled point `(u^2, v^2)`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngs_ln_d(
    state: *const NgsState,
    u_sq: f64,
    v_sq: f64,
    out: *mut f64,
) -> NgsStatus {
    guard(|| write(out, check(ln_d(state_ref(state)?, u_sq, v_sq))?.0, "out"))
}

/// Peak position and widths of `d` in the peaked regime; fails with `Regime` otherwise.
///
/// # Safety
/// `state` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ngs_peak(
    state: *const NgsState,
    u0: *mut f64,
    delta_u_sq: *mut f64,
    delta_v_sq: *mut f64,
) -> NgsStatus {
    guard(|| {
        let f = check(peak_fit(state_ref(state)?))?;
        write(u0, f.u0, "u0")?;
        write(delta_u_sq, f.delta_u_sq, "delta_u_sq")?;
        write(delta_v_sq, f.delta_v_sq, "delta_v_sq")
    })
}

/// Large-N `(1/N) ln w` at `(u^2, r^2)` with default settings. On
/// `NotConverged` the value and spread are still written.
///
/// # Safety
/// `state` must be a live handle; `value` must be writable and `spread` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ngs_ln_w(
    state: *const NgsState,
    u_sq: f64,
    r_sq: f64,
    value: *mut f64,
    spread: *mut f64,
) -> NgsStatus {
    guard(|| {
        let st = state_ref(state)?;
        if value.is_null() {
            return Err(null("value"));
        }
        let (v, s, status) = match ln_w(st, u_sq, r_sq, &WignerSettings::default()) {
            Ok(w) => (w.value, w.spread, Ok(())),
            Err(e @ Error::NotConverged { value, spread, .. }) => {
                (value, spread, check::<()>(Err(e)))
            }
            Err(e) => return check(Err(e)),
        };
        value.write(v);
        if !spread.is_null() {
            spread.write(s);
        }
        status
    })
}
