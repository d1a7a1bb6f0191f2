//! C ABI over `stable_chsh`.
//!
//! Instances are opaque handles created by the `sc_*_build` and
//! `sc_instance_from_json` functions and released with `sc_instance_free`.
//! Every function returns an [`ScStatus`]; on failure the message is
//! available from `sc_last_error` on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! `sc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stable_chsh::chsh::{chsh_value, ChshInstance, SignVector};
use stable_chsh::families::{build_family, build_quantum, FamilyId, QuantumKind};
use stable_chsh::io::{instance_from_json, instance_to_json};
use stable_chsh::pipeline::{verify_instance, VerifyConfig};
use stable_chsh::repclass::{classify_all, golden_mismatches};
use stable_chsh::{Error, GptInstance};

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// Malformed input: bad JSON, unknown name, out-of-range parameter.
    Input = 2,
    /// The instance violates a checked condition.
    Condition = 3,
    Numerical = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// Internal panic; the library state is unchanged.
    Panic = 6,
}

/// Family representatives, in classification order.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScFamily {
    Z4Reg = 0,
    K4Reg = 1,
    D4_125 = 2,
    D4_135 = 3,
    D4_145 = 4,
    D4_12345 = 5,
    D4Reg = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScQuantumKind {
    Bell = 0,
    Povm = 1,
}

/// Opaque instance handle.
pub struct ScInstance {
    inner: GptInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ScStatus {
    match e {
        Error::Json(_) | Error::Io(_) | Error::InvalidInput(_) | Error::Dimension(_) => ScStatus::Input,
        Error::NumericalFailure(_) | Error::NotInvertible { .. } => ScStatus::Numerical,
        _ => ScStatus::Condition,
    }
}

fn fail(e: Error) -> ScStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn guard(f: impl FnOnce() -> ScStatus) -> ScStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            ScStatus::Panic
        }
    }
}

fn null(what: &str) -> ScStatus {
    set_error(&format!("{what} is null"));
    ScStatus::Null
}

fn into_handle(inst: GptInstance, out: *mut *mut ScInstance) -> ScStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(ScInstance { inner: inst })) };
    ScStatus::Ok
}

fn put_string(s: String, out: *mut *mut c_char) -> ScStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null first.
            unsafe { *out = c.into_raw() };
            ScStatus::Ok
        }
        Err(_) => {
            set_error("output contains a nul byte");
            ScStatus::Numerical
        }
    }
}

/// Builds a family representative; `family` is an `ScFamily` value and `a`
/// lies in (1/2, 1].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sc_family_build(family: u32, a: f64, out: *mut *mut ScInstance) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let Some(&id) = FamilyId::ALL.get(family as usize) else {
            set_error(&format!("unknown family {family}"));
            return ScStatus::Input;
        };
        match build_family(id, a) {
            Ok(i) => into_handle(i, out),
            Err(e) => fail(e),
        }
    })
}

/// Builds a two-qubit realization; `kind` is an `ScQuantumKind` value.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sc_quantum_build(kind: u32, out: *mut *mut ScInstance) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let k = match kind {
            x if x == ScQuantumKind::Bell as u32 => QuantumKind::BellBasis,
            x if x == ScQuantumKind::Povm as u32 => QuantumKind::D4Povm,
            _ => {
                set_error(&format!("unknown quantum kind {kind}"));
                return ScStatus::Input;
            }
        };
        match build_quantum(k) {
            Ok(i) => into_handle(i, out),
            Err(e) => fail(e),
        }
    })
}

/// Parses an instance from a nul-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_from_json(json: *const c_char, out: *mut *mut ScInstance) -> ScStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("json is not valid UTF-8");
                return ScStatus::Utf8;
            }
        };
        match instance_from_json(text) {
            Ok(i) => into_handle(i, out),
            Err(e) => fail(e),
        }
    })
}

/// Serializes an instance; free the result with `sc_string_free`.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_to_json(inst: *const ScInstance, out: *mut *mut c_char) -> ScStatus {
    guard(|| {
        let (Some(i), false) = (inst.as_ref(), out.is_null()) else {
            return null("argument");
        };
        match instance_to_json(&i.inner) {
            Ok(s) => put_string(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Local dimensions and number of measurement outcomes.
///
/// # Safety
/// `inst` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_dims(
    inst: *const ScInstance,
    dim_a: *mut usize,
    dim_c: *mut usize,
    outcomes: *mut usize,
) -> ScStatus {
    guard(|| {
        let Some(i) = inst.as_ref() else { return null("inst") };
        if dim_a.is_null() || dim_c.is_null() || outcomes.is_null() {
            return null("out");
        }
        *dim_a = i.inner.dim_a();
        *dim_c = i.inner.dim_c();
        *outcomes = i.inner.outcome_count();
        ScStatus::Ok
    })
}

/// CHSH value with the standard signs `(+, +, +, -)`.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_chsh_value(inst: *const ScInstance, out: *mut f64) -> ScStatus {
    guard(|| {
        let (Some(i), false) = (inst.as_ref(), out.is_null()) else {
            return null("argument");
        };
        *out = chsh_value(&ChshInstance::from_gpt(&i.inner), &SignVector::STANDARD);
        ScStatus::Ok
    })
}

/// Runs the verification pipeline to word length `depth`. Writes the JSON
/// report to `report` (free with `sc_string_free`) and whether all stages
/// passed to `passed`. A failed stage is not an error: the status is `OK`.
///
/// # Safety
/// `inst` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_verify(
    inst: *const ScInstance,
    depth: usize,
    report: *mut *mut c_char,
    passed: *mut bool,
) -> ScStatus {
    guard(|| {
        let Some(i) = inst.as_ref() else { return null("inst") };
        if report.is_null() || passed.is_null() {
            return null("out");
        }
        let cfg = VerifyConfig { depth, ..VerifyConfig::default() };
        let r = match verify_instance(&i.inner, &cfg) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        *passed = r.pass;
        match serde_json::to_string(&r) {
            Ok(s) => put_string(s, report),
            Err(e) => fail(e.into()),
        }
    })
}

/// Classification with enumeration bound `n_max`, as a JSON array. Returns
/// `CONDITION` when the result differs from the expected list.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_classify(n_max: u32, out: *mut *mut c_char) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let r = match classify_all(n_max) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let status = match serde_json::to_string(&r.solutions) {
            Ok(s) => put_string(s, out),
            Err(e) => return fail(e.into()),
        };
        let mismatches = golden_mismatches(&r);
        if status == ScStatus::Ok && !mismatches.is_empty() {
            set_error(&mismatches.join("; "));
            return ScStatus::Condition;
        }
        status
    })
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `inst` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_free(inst: *mut ScInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}
