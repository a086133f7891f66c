//! C ABI for `conecount`.
//!
//! Forms are opaque [`CcForm`] handles created by [`cc_form_load`] and
//! released with [`cc_form_free`]. Every fallible call returns a
//! [`CcStatus`]; on failure [`cc_last_error`] copies the message of the most
//! recent error on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use conecount::counting::{count_cap, count_khintchine, estimate_kappa, KappaEstimate};
use conecount::enumeration::count_all;
use conecount::geometry::{c_cap, cap_measure_exact, Psi};
use conecount::quadform::{load_form, QuadraticSpace};
use conecount::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Dimension = 4,
    Unsupported = 5,
    InsufficientPoints = 6,
    Io = 7,
    Panic = 8,
    Other = 9,
}

/// Opaque quadratic space.
pub struct CcForm {
    space: QuadraticSpace,
}

/// A count with its main term.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CcCountReport {
    pub count: u64,
    pub main_term: f64,
    pub discrepancy: f64,
    pub relative_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::InvalidArgument(_) | Error::OffCone(_) | Error::Definiteness(_) => CcStatus::InvalidArgument,
        Error::Parse(_) => CcStatus::Parse,
        Error::Dimension { .. } => CcStatus::Dimension,
        Error::Unsupported(_) => CcStatus::Unsupported,
        Error::InsufficientPoints(_) => CcStatus::InsufficientPoints,
        Error::Io(_) => CcStatus::Io,
        _ => CcStatus::Other,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (CcStatus, String)>>(f: F) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            CcStatus::Panic
        }
    }
}

fn lib<T>(r: conecount::Result<T>) -> Result<T, (CcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CcStatus, String) {
    (CcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CcStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn form_arg<'a>(p: *const CcForm) -> Result<&'a CcForm, (CcStatus, String)> {
    p.as_ref().ok_or_else(|| null("form"))
}

unsafe fn alpha_arg(p: *const f64, len: usize) -> Result<Vec<f64>, (CcStatus, String)> {
    if p.is_null() {
        return Err(null("alpha"));
    }
    let v = std::slice::from_raw_parts(p, len).to_vec();
    let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(l > 0.0 && l.is_finite()) {
        return Err((CcStatus::InvalidArgument, "alpha has no length".into()));
    }
    Ok(v.into_iter().map(|x| x / l).collect())
}

fn kappa_for(form: &CcForm, kappa: f64, t: f64) -> Result<KappaEstimate, (CcStatus, String)> {
    let e = form.space.ellipsoid().ok_or((CcStatus::Unsupported, "form has no definite spatial block".to_string()))?;
    if kappa > 0.0 {
        Ok(KappaEstimate::from_kappa(e.n(), kappa, "given"))
    } else {
        lib(estimate_kappa(e, t))
    }
}

/// Load `standard:<n>` or a form file. On success `*out` owns a new handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_form_load(spec: *const c_char, out: *mut *mut CcForm) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let space = lib(load_form(str_arg(spec, "spec")?))?;
        *out = Box::into_raw(Box::new(CcForm { space }));
        Ok(())
    })
}

/// Release a handle from [`cc_form_load`]. Null is ignored.
///
/// # Safety
/// `form` must come from [`cc_form_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_form_free(form: *mut CcForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// `n` of the form, or 0 for a null handle.
///
/// # Safety
/// `form` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_form_n(form: *const CcForm) -> usize {
    form.as_ref().map_or(0, |f| f.space.n())
}

/// Copy the hex fingerprint (64 characters plus NUL) into `buf`.
///
/// # Safety
/// `form` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cc_form_fingerprint(form: *const CcForm, buf: *mut c_char, len: usize) -> CcStatus {
    guard(|| {
        let f = form_arg(form)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let fp = f.space.fingerprint();
        if len < fp.len() + 1 {
            return Err((CcStatus::InvalidArgument, format!("buffer needs {} bytes", fp.len() + 1)));
        }
        ptr::copy_nonoverlapping(fp.as_ptr() as *const c_char, buf, fp.len());
        *buf.add(fp.len()) = 0;
        Ok(())
    })
}

/// Number of primitive cone points with `q < t`.
///
/// # Safety
/// `form` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_count_all(form: *const CcForm, t: f64, out: *mut u64) -> CcStatus {
    guard(|| {
        let f = form_arg(form)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = f.space.ellipsoid().ok_or((CcStatus::Unsupported, "form has no definite spatial block".to_string()))?;
        *out = lib(count_all(e, t))?;
        Ok(())
    })
}

/// Cap count around `alpha` (length `n + 1`, normalized here). A
/// nonpositive `kappa` estimates it from the form.
///
/// # Safety
/// `form` must be a live handle, `alpha` readable for `alpha_len` values
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_count_cap(
    form: *const CcForm,
    alpha: *const f64,
    alpha_len: usize,
    r: f64,
    t: f64,
    kappa: f64,
    out: *mut CcCountReport,
) -> CcStatus {
    guard(|| {
        let f = form_arg(form)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = alpha_arg(alpha, alpha_len)?;
        if a.len() != f.space.n() + 1 {
            return Err((CcStatus::Dimension, format!("alpha needs {} entries", f.space.n() + 1)));
        }
        let k = kappa_for(f, kappa, t)?;
        let e = f.space.ellipsoid().expect("checked by kappa_for");
        let rep = lib(count_cap(e, &a, r, t, &k))?;
        *out = CcCountReport {
            count: rep.count,
            main_term: rep.main_term,
            discrepancy: rep.discrepancy,
            relative_error: rep.relative_error,
        };
        Ok(())
    })
}

/// Approximation count within `ψ(q)` of `alpha`; `psi` uses the CLI syntax.
///
/// # Safety
/// As for [`cc_count_cap`]; `psi` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cc_count_khintchine(
    form: *const CcForm,
    alpha: *const f64,
    alpha_len: usize,
    psi: *const c_char,
    t: f64,
    kappa: f64,
    out: *mut CcCountReport,
) -> CcStatus {
    guard(|| {
        let f = form_arg(form)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = alpha_arg(alpha, alpha_len)?;
        if a.len() != f.space.n() + 1 {
            return Err((CcStatus::Dimension, format!("alpha needs {} entries", f.space.n() + 1)));
        }
        let p = lib(Psi::parse(str_arg(psi, "psi")?))?;
        let k = kappa_for(f, kappa, t)?;
        let e = f.space.ellipsoid().expect("checked by kappa_for");
        let rep = lib(count_khintchine(e, &a, &p, t, &k))?;
        *out = CcCountReport {
            count: rep.count,
            main_term: rep.main_term,
            discrepancy: rep.discrepancy,
            relative_error: rep.relative_error,
        };
        Ok(())
    })
}

/// `σ_n` of a cap of chordal radius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_cap_measure(n: usize, r: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(cap_measure_exact(n, r))?;
        Ok(())
    })
}

/// `c_cap(n)`.
#[no_mangle]
pub extern "C" fn cc_c_cap(n: usize) -> f64 {
    c_cap(n)
}

/// Copy the last error message on this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Library version, NUL-terminated, static.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
