use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use stable_chsh_ffi::*;

fn last_error() -> String {
    let p = sc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { sc_string_free(p) };
    s
}

#[test]
fn build_query_and_free() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sc_family_build(ScFamily::D4Reg as u32, 1.0, &mut h) }, ScStatus::Ok);
    let (mut da, mut dc, mut n) = (0, 0, 0);
    assert_eq!(unsafe { sc_instance_dims(h, &mut da, &mut dc, &mut n) }, ScStatus::Ok);
    assert_eq!((da, dc, n), (8, 8, 8));
    let mut v = 0.0;
    assert_eq!(unsafe { sc_chsh_value(h, &mut v) }, ScStatus::Ok);
    assert!((v - 4.0).abs() < 1e-12);
    unsafe { sc_instance_free(h) };
}

#[test]
fn json_round_trip_through_handles() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sc_quantum_build(ScQuantumKind::Povm as u32, &mut h) }, ScStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sc_instance_to_json(h, &mut s) }, ScStatus::Ok);
    let json = take_string(s);
    let c = CString::new(json.clone()).unwrap();
    let mut h2 = ptr::null_mut();
    assert_eq!(unsafe { sc_instance_from_json(c.as_ptr(), &mut h2) }, ScStatus::Ok);
    let mut s2 = ptr::null_mut();
    assert_eq!(unsafe { sc_instance_to_json(h2, &mut s2) }, ScStatus::Ok);
    assert_eq!(take_string(s2), json);
    unsafe {
        sc_instance_free(h);
        sc_instance_free(h2);
    }
}

#[test]
fn verify_reports_pass_and_failure() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sc_family_build(ScFamily::K4Reg as u32, 0.75, &mut h) }, ScStatus::Ok);
    let mut report = ptr::null_mut();
    let mut passed = false;
    assert_eq!(unsafe { sc_verify(h, 4, &mut report, &mut passed) }, ScStatus::Ok);
    assert!(passed);
    let r: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
    assert_eq!(r["label"], "chi_{1234}^{(K4)}");
    unsafe { sc_instance_free(h) };

    let bad = CString::new(r#"{"version":1,"dim_a":2}"#).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sc_instance_from_json(bad.as_ptr(), &mut h) }, ScStatus::Input);
    assert!(h.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn classify_returns_eight_rows() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sc_classify(8, &mut s) }, ScStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
    assert_eq!(unsafe { sc_classify(4, &mut s) }, ScStatus::Input);
}

#[test]
fn invalid_arguments() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sc_family_build(99, 1.0, &mut h) }, ScStatus::Input);
    assert!(last_error().contains("unknown family"));
    assert_eq!(unsafe { sc_family_build(0, 0.2, &mut h) }, ScStatus::Input);
    assert_eq!(unsafe { sc_quantum_build(7, &mut h) }, ScStatus::Input);
    assert_eq!(unsafe { sc_family_build(0, 1.0, ptr::null_mut()) }, ScStatus::Null);
    let mut v = 0.0;
    assert_eq!(unsafe { sc_chsh_value(ptr::null(), &mut v) }, ScStatus::Null);
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { sc_instance_from_json(invalid.as_ptr().cast(), &mut h) }, ScStatus::Utf8);
    unsafe {
        sc_instance_free(ptr::null_mut());
        sc_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stable_chsh.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["sc_family_build", "sc_verify", "sc_last_error", "sc_instance_free", "SC_STATUS_PANIC"] {
        assert!(text.contains(f), "{f}");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
