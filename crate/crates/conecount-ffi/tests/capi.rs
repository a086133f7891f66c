use std::ffi::{c_char, CStr, CString};
use std::ptr;

use conecount_ffi::*;

fn load(spec: &str) -> *mut CcForm {
    let s = CString::new(spec).unwrap();
    let mut f: *mut CcForm = ptr::null_mut();
    assert_eq!(unsafe { cc_form_load(s.as_ptr(), &mut f) }, CcStatus::Ok);
    assert!(!f.is_null());
    f
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { cc_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn form_lifecycle() {
    let f = load("standard:2");
    assert_eq!(unsafe { cc_form_n(f) }, 2);
    let mut buf = [0 as c_char; 65];
    assert_eq!(unsafe { cc_form_fingerprint(f, buf.as_mut_ptr(), buf.len()) }, CcStatus::Ok);
    let fp = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
    assert_eq!(fp.len(), 64);
    let mut small = [0 as c_char; 10];
    assert_eq!(unsafe { cc_form_fingerprint(f, small.as_mut_ptr(), small.len()) }, CcStatus::InvalidArgument);
    unsafe { cc_form_free(f) };
    unsafe { cc_form_free(ptr::null_mut()) };
    assert_eq!(unsafe { cc_form_n(ptr::null()) }, 0);
}

#[test]
fn counts_match_library() {
    let f = load("standard:1");
    let mut all = 0u64;
    // q ≤ 5: four points at q = 1 and eight at q = 5.
    assert_eq!(unsafe { cc_count_all(f, 6.0, &mut all) }, CcStatus::Ok);
    assert_eq!(all, 12);
    let alpha = [1.0, 0.0];
    let mut rep = CcCountReport::default();
    assert_eq!(unsafe { cc_count_cap(f, alpha.as_ptr(), 2, 3.0, 6.0, 0.5, &mut rep) }, CcStatus::Ok);
    assert_eq!(rep.count, 12);
    assert_eq!(rep.main_term, 0.5 * 6.0);
    let psi = CString::new("pow:c=1,lambda=1").unwrap();
    assert_eq!(unsafe { cc_count_khintchine(f, alpha.as_ptr(), 2, psi.as_ptr(), 50.0, 0.5, &mut rep) }, CcStatus::Ok);
    assert!(rep.main_term > 0.0);
    unsafe { cc_form_free(f) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("standard:x").unwrap();
    let mut f: *mut CcForm = ptr::null_mut();
    assert_eq!(unsafe { cc_form_load(bad.as_ptr(), &mut f) }, CcStatus::Parse);
    assert!(f.is_null());
    assert!(last_error().contains("bad dimension"));
    assert_eq!(unsafe { cc_form_load(ptr::null(), &mut f) }, CcStatus::NullPointer);
    let missing = CString::new("/nonexistent/form.txt").unwrap();
    assert_eq!(unsafe { cc_form_load(missing.as_ptr(), &mut f) }, CcStatus::Io);

    let g = load("standard:2");
    let alpha = [1.0, 0.0];
    let mut rep = CcCountReport::default();
    assert_eq!(unsafe { cc_count_cap(g, alpha.as_ptr(), 2, 0.5, 10.0, 1.0, &mut rep) }, CcStatus::Dimension);
    let zero = [0.0, 0.0, 0.0];
    assert_eq!(unsafe { cc_count_cap(g, zero.as_ptr(), 3, 0.5, 10.0, 1.0, &mut rep) }, CcStatus::InvalidArgument);
    let bad_psi = CString::new("sin:c=1").unwrap();
    let a3 = [1.0, 0.0, 0.0];
    assert_eq!(unsafe { cc_count_khintchine(g, a3.as_ptr(), 3, bad_psi.as_ptr(), 10.0, 1.0, &mut rep) }, CcStatus::Parse);
    // κ̂ needs enough points.
    assert_eq!(unsafe { cc_count_cap(g, a3.as_ptr(), 3, 0.5, 3.0, 0.0, &mut rep) }, CcStatus::InsufficientPoints);
    unsafe { cc_form_free(g) };
}

#[test]
fn measures_and_constants() {
    let mut m = 0.0;
    assert_eq!(unsafe { cc_cap_measure(1, 2f64.sqrt(), &mut m) }, CcStatus::Ok);
    assert!((m - 0.5).abs() < 1e-12);
    assert_eq!(unsafe { cc_cap_measure(2, -1.0, &mut m) }, CcStatus::InvalidArgument);
    assert_eq!(cc_c_cap(2), 0.25);
    let v = unsafe { CStr::from_ptr(cc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/conecount.h")).unwrap();
    for name in ["cc_form_load", "cc_form_free", "cc_count_cap", "cc_count_khintchine", "cc_last_error", "CcStatus", "CcCountReport"] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/conecount.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax not checked"),
    }
}
