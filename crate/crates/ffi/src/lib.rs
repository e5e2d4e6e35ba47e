//! C interface to `lattice-index`.
//!
//! Systems and reports are opaque handles created by `li_*` constructors and released
//! with the matching `*_free` function. Every fallible call returns an [`LiStatus`];
//! on failure [`li_last_error_message`] describes the cause. Strings returned as
//! `char *` are owned by the caller and must be released with [`li_string_free`].
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access implied by their type.
//! Handles must not be used after they are freed. Null pointers are reported as
//! [`LiStatus::NullArgument`].

use lattice_index::builtins::{self, IndexValue};
use lattice_index::classical::welch_index;
use lattice_index::io::System;
use lattice_index::qca::index_support;
use lattice_index::report::{VerificationReport, EXIT_DISAGREEMENT, EXIT_PASS};
use lattice_index::verify::{self, VerifyOptions};
use lattice_index::walk::index_all_cuts;
use lattice_index::walk_ti::index_coefficient;
use lattice_index::{Error, Tolerances};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Result codes; 0 to 2 coincide with the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiStatus {
    Ok = 0,
    /// The input failed to parse or validate.
    InputError = 1,
    /// Index routes or invariants disagree.
    Disagreement = 2,
    NullArgument = 3,
    InvalidUtf8 = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A validated system of any supported kind.
pub struct LiSystem {
    system: System,
    expected: Option<IndexValue>,
    subject: String,
}

/// Outcome of a verification run.
pub struct LiReport {
    report: VerificationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> LiStatus {
    set_error(e.to_string());
    if e.is_disagreement() {
        LiStatus::Disagreement
    } else {
        LiStatus::InputError
    }
}

/// Runs `f`, turning panics into [`LiStatus::Panic`].
fn guard(f: impl FnOnce() -> LiStatus) -> LiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            LiStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LiStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(LiStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        LiStatus::InvalidUtf8
    })
}

unsafe fn emit_system(out: *mut *mut LiSystem, sys: LiSystem) -> LiStatus {
    *out = Box::into_raw(Box::new(sys));
    LiStatus::Ok
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if false $(|| $p.is_null())+ {
            set_error("null pointer argument");
            return LiStatus::NullArgument;
        }
    };
}

/// Message of the last failure on this thread; valid until the next `li_*` call
/// on the same thread. Never null.
#[no_mangle]
pub extern "C" fn li_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn li_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a system from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_system_from_json(
    json: *const c_char,
    out: *mut *mut LiSystem,
) -> LiStatus {
    nonnull!(out);
    guard(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match System::parse(text) {
            Ok(system) => emit_system(
                out,
                LiSystem {
                    system,
                    expected: None,
                    subject: "json".into(),
                },
            ),
            Err(e) => status_of(&e),
        }
    })
}

/// Loads a system file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_system_from_file(
    path: *const c_char,
    out: *mut *mut LiSystem,
) -> LiStatus {
    nonnull!(out);
    guard(|| {
        let p = match read_str(path) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match System::load(Path::new(p)) {
            Ok(system) => emit_system(
                out,
                LiSystem {
                    system,
                    expected: None,
                    subject: p.into(),
                },
            ),
            Err(e) => status_of(&e),
        }
    })
}

/// Builds a named builtin system; its known index is checked by [`li_verify`].
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_system_builtin(
    name: *const c_char,
    out: *mut *mut LiSystem,
) -> LiStatus {
    nonnull!(out);
    guard(|| {
        let n = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match builtins::builtin(n) {
            Ok(b) => emit_system(
                out,
                LiSystem {
                    system: b.system,
                    expected: Some(b.expected),
                    subject: format!("builtin:{n}"),
                },
            ),
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a system; null is ignored.
///
/// # Safety
/// `sys` must come from an `li_system_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn li_system_free(sys: *mut LiSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Schema name of the system ("walk", "qca_circuit", …), or null for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn li_system_kind(sys: *const LiSystem) -> *const c_char {
    let Some(s) = sys.as_ref() else {
        return ptr::null();
    };
    match s.system.kind() {
        "walk" => c"walk".as_ptr(),
        "walk_circuit" => c"walk_circuit".as_ptr(),
        "ti_walk" => c"ti_walk".as_ptr(),
        "qca_circuit" => c"qca_circuit".as_ptr(),
        "qca_global" => c"qca_global".as_ptr(),
        _ => c"classical_rule".as_ptr(),
    }
}

/// Index as a fraction num/den in lowest terms; walks give den = 1 and a signed num.
///
/// # Safety
/// `sys` must be a live handle; `num` and `den` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn li_index(sys: *const LiSystem, num: *mut i64, den: *mut i64) -> LiStatus {
    nonnull!(sys, num, den);
    guard(|| {
        let s = &(*sys).system;
        let value = match s {
            System::Walk(u) => index_all_cuts(u).map(|k| (k, 1)),
            System::WalkCircuit(c) => c
                .to_banded()
                .and_then(|u| index_all_cuts(&u))
                .map(|k| (k, 1)),
            System::TiWalk(u) => index_coefficient(u).map(|k| (k, 1)),
            System::Qca(q) => index_support(q).map(|(r, _)| (r.num as i64, r.den as i64)),
            System::Classical(r) => welch_index(r, r.radius().max(r.inv_radius()).max(1))
                .map(|w| (w.index.num as i64, w.index.den as i64)),
        };
        match value {
            Ok((p, q)) => {
                *num = p;
                *den = q;
                LiStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Runs the full invariant suite. `tol_factor` scales every tolerance (1.0 for the
/// defaults); `grid` is the dispersion grid (0 for the default). The report is
/// returned even when checks fail; the status tells whether it passed.
///
/// # Safety
/// `sys` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_verify(
    sys: *const LiSystem,
    tol_factor: f64,
    grid: usize,
    seed: u64,
    out: *mut *mut LiReport,
) -> LiStatus {
    nonnull!(sys, out);
    *out = ptr::null_mut();
    if !(tol_factor.is_finite() && tol_factor > 0.0) {
        set_error("tolerance factor must be positive");
        return LiStatus::InputError;
    }
    guard(|| {
        let s = &*sys;
        let opts = VerifyOptions {
            tol: Tolerances::scaled(tol_factor),
            grid: if grid == 0 {
                VerifyOptions::default().grid
            } else {
                grid
            },
            seed,
        };
        let report = verify::verify_report(&s.subject, &s.system, s.expected, &opts);
        let status = match report.exit_code() {
            EXIT_PASS => LiStatus::Ok,
            EXIT_DISAGREEMENT => LiStatus::Disagreement,
            _ => LiStatus::InputError,
        };
        if status != LiStatus::Ok {
            set_error(report.to_string());
        }
        *out = Box::into_raw(Box::new(LiReport { report }));
        status
    })
}

/// Whether the report passed; false for null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn li_report_passed(r: *const LiReport) -> bool {
    r.as_ref().is_some_and(|r| r.report.pass)
}

/// The report as JSON; free with [`li_string_free`]. Null on failure.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn li_report_json(r: *const LiReport) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("null report");
        return ptr::null_mut();
    };
    match serde_json::to_string(&r.report).map(CString::new) {
        Ok(Ok(s)) => s.into_raw(),
        _ => {
            set_error("report serialization failed");
            ptr::null_mut()
        }
    }
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `r` must come from [`li_verify`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn li_report_free(r: *mut LiReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn li_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
