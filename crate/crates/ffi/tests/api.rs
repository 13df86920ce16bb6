use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use gibmap_ffi::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn load(name: &str) -> *mut GibNetwork {
    let path = CString::new(fixture(name).to_str().unwrap()).unwrap();
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { gib_network_from_file(path.as_ptr(), &mut net) }, GibStatus::Ok);
    assert!(!net.is_null());
    net
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gib_last_error()) }.to_str().unwrap().to_owned()
}

fn take(s: *mut std::os::raw::c_char) -> serde_json::Value {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { gib_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

#[test]
fn explains_vee_with_default_query() {
    let net = load("vee.json");
    assert_eq!(unsafe { gib_network_variable_count(net) }, 3);
    let evidence = CString::new(r#"{"C": "t"}"#).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { gib_explain_json(net, evidence.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(status, GibStatus::Ok, "{}", last_error());
    let json = take(out);
    let best = &json["explanations"][0];
    assert!((best["p"].as_f64().unwrap() - 0.48).abs() < 1e-12);
    assert_eq!(best["assignment"][1]["variable"], "A");
    unsafe { gib_network_free(net) };
}

#[test]
fn k_best_and_oracle_agree_on_tracks() {
    let net = load("tracks.json");
    let evidence = CString::new(r#"{"at-tracks": "T"}"#).unwrap();
    let query = GibQuery { k: 3, ..gib_query_default() };
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { gib_explain_json(net, evidence.as_ptr(), &query, &mut out) }, GibStatus::Ok);
    let search = take(out);
    assert_eq!(search["explanations"].as_array().unwrap().len(), 2);

    assert_eq!(unsafe { gib_oracle_json(net, evidence.as_ptr(), &mut out) }, GibStatus::Ok);
    let oracle = take(out);
    assert_eq!(oracle["explanations"][0], search["explanations"][0]);
    unsafe { gib_network_free(net) };
}

#[test]
fn errors_set_status_and_message() {
    let mut net = ptr::null_mut();
    let bad = CString::new("{\"variables\": 3}").unwrap();
    assert_eq!(unsafe { gib_network_from_json(bad.as_ptr(), &mut net) }, GibStatus::InvalidInput);
    assert!(net.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { gib_network_from_json(ptr::null(), &mut net) }, GibStatus::NullArgument);

    let net = load("vee.json");
    assert!(last_error().is_empty());
    let mut out = ptr::null_mut();
    let unknown = CString::new(r#"{"C": "z"}"#).unwrap();
    assert_eq!(unsafe { gib_explain_json(net, unknown.as_ptr(), ptr::null(), &mut out) }, GibStatus::InvalidInput);
    assert!(last_error().contains("UnknownValue"), "{}", last_error());
    assert!(out.is_null());

    let bad_delta = GibQuery { delta: 2.0, ..gib_query_default() };
    assert_eq!(unsafe { gib_explain_json(net, ptr::null(), &bad_delta, &mut out) }, GibStatus::InvalidInput);
    assert_eq!(unsafe { gib_explain_json(ptr::null(), ptr::null(), ptr::null(), &mut out) }, GibStatus::NullArgument);
    unsafe { gib_network_free(net) };
}

#[test]
fn loads_from_text_and_accepts_null_evidence() {
    let json = std::fs::read_to_string(fixture("vee.json")).unwrap();
    let text = CString::new(json).unwrap();
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { gib_network_from_json(text.as_ptr(), &mut net) }, GibStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { gib_oracle_json(net, ptr::null(), &mut out) }, GibStatus::Ok);
    let best = take(out);
    assert!(best["explanations"][0]["p"].as_f64().unwrap() > 0.0);
    unsafe { gib_network_free(net) };
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        gib_network_free(ptr::null_mut());
        gib_string_free(ptr::null_mut());
        assert_eq!(gib_network_variable_count(ptr::null()), 0);
    }
    let version = unsafe { CStr::from_ptr(gib_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
