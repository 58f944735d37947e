use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use pumped_lindblad_ffi::*;

const TWO_LEVEL: &str = include_str!("../../core/configs/two_level.json");

fn model() -> *mut PlModel {
    let json = CString::new(TWO_LEVEL).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pl_model_from_json(json.as_ptr(), &mut m) }, PlStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { pl_string_free(s) };
    out
}

fn last_error() -> String {
    let p = pl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn check_report_round_trip() {
    let m = model();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pl_check_report(m, &mut s) }, PlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["section"], "assumptions");
    assert_eq!(v["schema_version"], "1");
    assert!(pl_last_error_message().is_null());
    unsafe { pl_model_free(m) };
}

#[test]
fn stationary_populations_and_buffer_size() {
    let m = model();
    let mut n = 0usize;
    assert_eq!(unsafe { pl_stationary_populations(m, ptr::null_mut(), 0, &mut n) }, PlStatus::BufferTooSmall);
    assert_eq!(n, 2);
    let mut buf = [0.0; 2];
    assert_eq!(unsafe { pl_stationary_populations(m, buf.as_mut_ptr(), 2, &mut n) }, PlStatus::Ok);
    assert!((buf[0] + buf[1] - 1.0).abs() < 1e-12);
    assert!(buf[0] > buf[1]);
    unsafe { pl_model_free(m) };
}

#[test]
fn evolve_csv_has_header() {
    let mut cfg: serde_json::Value = serde_json::from_str(TWO_LEVEL).unwrap();
    cfg["sim"] = serde_json::json!({ "t_end": 10.0, "n_out": 5 });
    let json = CString::new(cfg.to_string()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pl_model_from_json(json.as_ptr(), &mut m) }, PlStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pl_evolve_csv(m, &mut s) }, PlStatus::Ok);
    let csv = take(s);
    assert!(csv.starts_with("t,pop_1,pop_2,trace,min_eig,purity\n"));
    assert_eq!(csv.lines().count(), 7);
    unsafe { pl_model_free(m) };
}

#[test]
fn floquet_report_section() {
    let mut cfg: serde_json::Value = serde_json::from_str(TWO_LEVEL).unwrap();
    cfg["floquet"]["n_modes"] = serde_json::json!(6);
    let json = CString::new(cfg.to_string()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pl_model_from_json(json.as_ptr(), &mut m) }, PlStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pl_floquet_report(m, false, &mut s) }, PlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["section"], "floquet");
    unsafe { pl_model_free(m) };
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    let bad = CString::new("{\"atom\": {}}").unwrap();
    assert_eq!(unsafe { pl_model_from_json(bad.as_ptr(), &mut m) }, PlStatus::Config);
    assert!(m.is_null());
    assert!(last_error().contains("configuration"));

    assert_eq!(unsafe { pl_model_from_json(ptr::null(), &mut m) }, PlStatus::NullPointer);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pl_check_report(ptr::null(), &mut s) }, PlStatus::NullPointer);

    let utf = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { pl_model_from_json(utf.as_ptr().cast(), &mut m) }, PlStatus::InvalidUtf8);

    // Not Hermitian: a model-level failure surfaces as a configuration error.
    let non_herm = TWO_LEVEL.replace("\"energies\": [0.0, 1.0]", "\"matrix\": [[[0, 0], [1, 0]], [[0, 0], [1, 0]]]");
    let c = CString::new(non_herm).unwrap();
    assert_eq!(unsafe { pl_model_from_json(c.as_ptr(), &mut m) }, PlStatus::Config);
    assert!(last_error().contains("Hermitian"));

    // Null frees are no-ops.
    unsafe {
        pl_model_free(ptr::null_mut());
        pl_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pumped_lindblad.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "pl_model_from_json",
        "pl_model_free",
        "pl_check_report",
        "pl_evolve_csv",
        "pl_floquet_report",
        "pl_stationary_populations",
        "pl_string_free",
        "pl_last_error_message",
        "PL_STATUS_OK",
        "typedef struct PlModel PlModel",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // The header must also be valid C when a compiler is around.
    if let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-include", "stdbool.h", "-include", "stddef.h"])
        .arg(&header)
        .status()
    {
        assert!(status.success());
    }
}
