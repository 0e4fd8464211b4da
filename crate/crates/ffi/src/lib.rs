//! C ABI over the `cophy` crate.
//!
//! Instances and layouts are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`CophyStatus`]; the message of the last failure on the calling thread is
//! available from [`cophy_last_error_message`]. Mapping indices select a
//! `#GAMMA` section by position; a negative index selects the lca mapping.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cophy::io::{emit_json, emit_svg, parse_instance, CophyInstance, LayoutDocument, SvgStyle};
use cophy::layout::{run_algorithm, Algorithm, LayoutError, LayoutOptions};
use cophy::oracle::{brute_force_min_crossings, OracleError, OracleLimits};
use cophy::planar::is_planar_instance;
use cophy::Reconciliation;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CophyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidReconciliation = 4,
    NotPlanar = 5,
    NotTimeConsistent = 6,
    OutOfRange = 7,
    LimitExceeded = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CophyAlgorithm {
    Planar = 0,
    Shs = 1,
    Smp = 2,
}

impl From<CophyAlgorithm> for Algorithm {
    fn from(a: CophyAlgorithm) -> Self {
        match a {
            CophyAlgorithm::Planar => Algorithm::Planar,
            CophyAlgorithm::Shs => Algorithm::Shs,
            CophyAlgorithm::Smp => Algorithm::Smp,
        }
    }
}

/// Parsed instance file.
pub struct CophyInstanceHandle(CophyInstance);

/// A computed drawing with its document.
pub struct CophyLayoutHandle(LayoutDocument);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: CophyStatus, msg: impl Into<String>) -> CophyStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`CophyStatus::Panic`].
fn guard(f: impl FnOnce() -> CophyStatus) -> CophyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CophyStatus::Panic, "internal panic"),
    }
}

fn layout_status(e: &LayoutError) -> CophyStatus {
    match e {
        LayoutError::NotPlanar => CophyStatus::NotPlanar,
        LayoutError::NotTimeConsistent => CophyStatus::NotTimeConsistent,
        _ => CophyStatus::InvalidReconciliation,
    }
}

fn reconciliation(inst: &CophyInstance, gamma: i32) -> Result<Reconciliation, CophyStatus> {
    let r = if gamma < 0 {
        inst.lca_reconciliation()
    } else {
        if gamma as usize >= inst.gammas.len() {
            return Err(fail(
                CophyStatus::OutOfRange,
                format!(
                    "mapping index {gamma} but the instance has {}",
                    inst.gammas.len()
                ),
            ));
        }
        inst.reconciliation(gamma as usize)
    };
    r.map_err(|e| fail(CophyStatus::InvalidReconciliation, e.to_string()))
}

fn to_c_string(s: String, out: *mut *mut c_char) -> CophyStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` is non-null.
            unsafe { *out = c.into_raw() };
            CophyStatus::Ok
        }
        Err(_) => fail(CophyStatus::InvalidUtf8, "output contains a NUL byte"),
    }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cophy_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cophy_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses an instance file's text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cophy_instance_parse(
    text: *const c_char,
    out: *mut *mut CophyInstanceHandle,
) -> CophyStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            return fail(CophyStatus::InvalidUtf8, "instance text is not UTF-8");
        };
        match parse_instance(s) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(CophyInstanceHandle(inst)));
                CophyStatus::Ok
            }
            Err(e) => fail(CophyStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `inst` must come from [`cophy_instance_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cophy_instance_free(inst: *mut CophyInstanceHandle) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of named mappings in the instance.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_instance_gamma_count(
    inst: *const CophyInstanceHandle,
    out: *mut usize,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        *out = (*inst).0.gammas.len();
        CophyStatus::Ok
    })
}

/// Whether the instance admits a crossing-free drawing.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_instance_is_planar(
    inst: *const CophyInstanceHandle,
    out: *mut bool,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let i = &(*inst).0;
        match is_planar_instance(&i.host, &i.parasite, &i.phi) {
            Ok(p) => {
                *out = p;
                CophyStatus::Ok
            }
            Err(e) => fail(CophyStatus::InvalidReconciliation, e.to_string()),
        }
    })
}

/// Checks the validity conditions of one mapping; `*valid` is false with
/// the violations in the error message when they fail.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_validate(
    inst: *const CophyInstanceHandle,
    gamma: i32,
    valid: *mut bool,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || valid.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let rec = match reconciliation(&(*inst).0, gamma) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let report = rec.validate();
        *valid = report.is_valid();
        if !report.is_valid() {
            set_error(report.to_string());
        }
        CophyStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_time_consistent(
    inst: *const CophyInstanceHandle,
    gamma: i32,
    out: *mut bool,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let rec = match reconciliation(&(*inst).0, gamma) {
            Ok(r) => r,
            Err(s) => return s,
        };
        if let Err(e) = rec.ensure_valid() {
            return fail(CophyStatus::InvalidReconciliation, e.to_string());
        }
        *out = rec.check_time_consistency().is_some();
        CophyStatus::Ok
    })
}

/// Draws one mapping.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to free with
/// [`cophy_layout_free`].
#[no_mangle]
pub unsafe extern "C" fn cophy_layout(
    inst: *const CophyInstanceHandle,
    gamma: i32,
    algorithm: CophyAlgorithm,
    compact_y: bool,
    out: *mut *mut CophyLayoutHandle,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let i = &(*inst).0;
        let rec = match reconciliation(i, gamma) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let name = if gamma < 0 {
            "lca".to_string()
        } else {
            i.gammas[gamma as usize].name.clone()
        };
        let opts = LayoutOptions {
            compact_y,
            ..LayoutOptions::default()
        };
        let algo = algorithm.into();
        let layout = match run_algorithm(algo, &rec, opts) {
            Ok(l) => l,
            Err(e) => return fail(layout_status(&e), e.to_string()),
        };
        match LayoutDocument::new(&rec, &name, algo, opts, layout) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(CophyLayoutHandle(doc)));
                CophyStatus::Ok
            }
            Err(e) => fail(CophyStatus::InvalidReconciliation, e.to_string()),
        }
    })
}

/// # Safety
/// `layout` must come from [`cophy_layout`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cophy_layout_free(layout: *mut CophyLayoutHandle) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_layout_crossings(
    layout: *const CophyLayoutHandle,
    out: *mut usize,
) -> CophyStatus {
    guard(|| {
        if layout.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        *out = (*layout).0.crossing_count;
        CophyStatus::Ok
    })
}

/// Canonical JSON of the layout; free the string with [`cophy_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_layout_json(
    layout: *const CophyLayoutHandle,
    out: *mut *mut c_char,
) -> CophyStatus {
    guard(|| {
        if layout.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        to_c_string(emit_json(&(*layout).0), out)
    })
}

/// SVG of the layout. `style` is `plain`, `default`, a style file path or
/// NULL for the default style.
///
/// # Safety
/// Pointers must be valid; `style` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cophy_layout_svg(
    layout: *const CophyLayoutHandle,
    style: *const c_char,
    out: *mut *mut c_char,
) -> CophyStatus {
    guard(|| {
        if layout.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let style = if style.is_null() {
            SvgStyle::default()
        } else {
            let Ok(s) = CStr::from_ptr(style).to_str() else {
                return fail(CophyStatus::InvalidUtf8, "style is not UTF-8");
            };
            match SvgStyle::named_or_file(s) {
                Ok(st) => st,
                Err(e) => return fail(CophyStatus::ParseError, e.to_string()),
            }
        };
        to_c_string(emit_svg(&(*layout).0, &style), out)
    })
}

/// Exhaustive minimum crossing count of one mapping.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cophy_oracle_min_crossings(
    inst: *const CophyInstanceHandle,
    gamma: i32,
    max_states: u64,
    out: *mut usize,
) -> CophyStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return fail(CophyStatus::NullPointer, "null argument");
        }
        let rec = match reconciliation(&(*inst).0, gamma) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let limits = OracleLimits {
            max_states,
            ..OracleLimits::default()
        };
        match brute_force_min_crossings(&rec, limits) {
            Ok(r) => {
                *out = r.min_crossings;
                CophyStatus::Ok
            }
            Err(e @ OracleError::LimitExceeded { .. }) => {
                fail(CophyStatus::LimitExceeded, e.to_string())
            }
            Err(OracleError::Layout(e)) => fail(layout_status(&e), e.to_string()),
        }
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cophy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
