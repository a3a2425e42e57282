use std::ffi::{CStr, CString};
use std::ptr;

use anonqc_ffi::*;

fn last_error() -> String {
    let p = anq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn options(seed: u64) -> AnqRunOptions {
    AnqRunOptions { seed, ..anq_run_options_default() }
}

fn recovered(run: *const AnqRun) -> Vec<usize> {
    let mut len = 0;
    let status = unsafe { anq_run_recovered(run, ptr::null_mut(), 0, &mut len) };
    assert!(matches!(status, AnqStatus::BufferTooSmall | AnqStatus::Ok));
    let mut buf = vec![0usize; len];
    assert_eq!(unsafe { anq_run_recovered(run, buf.as_mut_ptr(), buf.len(), &mut len) }, AnqStatus::Ok);
    buf
}

#[test]
fn protocol_two_round_trip() {
    let values = [2usize, 0, 5];
    let mut run = ptr::null_mut();
    let status = unsafe { anq_run_protocol_two(values.as_ptr(), values.len(), &options(7), &mut run) };
    assert_eq!(status, AnqStatus::Ok);
    assert!(!unsafe { anq_run_aborted(run) });
    let mut got = recovered(run);
    got.sort_unstable();
    assert_eq!(got, vec![0, 2, 5]);

    let json = unsafe { anq_run_transcript_json(run) };
    assert!(!json.is_null());
    let mut consistent = false;
    assert_eq!(unsafe { anq_verify_transcript(json, &mut consistent) }, AnqStatus::Ok);
    assert!(consistent);
    unsafe {
        anq_string_free(json);
        anq_run_free(run);
    }
}

#[test]
fn protocol_one_counts() {
    let a = [0usize, 2];
    let b = [2usize];
    let sets = [a.as_ptr(), b.as_ptr()];
    let lens = [a.len(), b.len()];
    let opts = AnqRunOptions { strict_d: true, ..options(3) };
    let mut run = ptr::null_mut();
    let status = unsafe { anq_run_protocol_one(sets.as_ptr(), lens.as_ptr(), 2, &opts, &mut run) };
    assert_eq!(status, AnqStatus::Ok, "{}", last_error());
    assert_eq!(recovered(run), vec![1, 0, 2]);
    unsafe { anq_run_free(run) };
}

#[test]
fn eavesdropper_aborts_and_recovers_nothing() {
    let values = [1usize, 0];
    let opts = AnqRunOptions { eve: AnqEve::InterceptResend, decoys: 50, ..options(11) };
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { anq_run_protocol_two(values.as_ptr(), 2, &opts, &mut run) }, AnqStatus::Ok);
    assert!(unsafe { anq_run_aborted(run) });
    let mut len = 0;
    assert_eq!(unsafe { anq_run_recovered(run, ptr::null_mut(), 0, &mut len) }, AnqStatus::Protocol);
    unsafe { anq_run_free(run) };
}

#[test]
fn errors_map_to_status_codes() {
    let values = [5usize];
    let opts = AnqRunOptions { d: 3, ..options(0) };
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { anq_run_protocol_two(values.as_ptr(), 1, &opts, &mut run) }, AnqStatus::Domain);
    assert!(run.is_null());
    assert!(last_error().contains("does not fit"));

    assert_eq!(unsafe { anq_run_protocol_two(ptr::null(), 2, &opts, &mut run) }, AnqStatus::NullPointer);
    assert_eq!(unsafe { anq_run_protocol_two(values.as_ptr(), 1, ptr::null(), &mut run) }, AnqStatus::NullPointer);

    let mut passed = false;
    assert_eq!(unsafe { anq_swap_check(7, 5, 0, 0, &mut passed) }, AnqStatus::Capability);

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { anq_verify_transcript(bad.as_ptr(), &mut passed) }, AnqStatus::Domain);
}

#[test]
fn swap_check_and_constants() {
    let mut passed = false;
    assert_eq!(unsafe { anq_swap_check(2, 2, 0, 0, &mut passed) }, AnqStatus::Ok);
    assert!(passed);
    assert_eq!(anq_intercept_detection_probability(2), 0.25);
    assert!(anq_intercept_detection_probability(1) < 0.0);
    let version = unsafe { CStr::from_ptr(anq_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        anq_run_free(ptr::null_mut());
        anq_string_free(ptr::null_mut());
    }
    assert!(!unsafe { anq_run_aborted(ptr::null()) });
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/anonqc.h")).unwrap();
    for name in [
        "anq_version",
        "anq_last_error",
        "anq_run_options_default",
        "anq_run_protocol_one",
        "anq_run_protocol_two",
        "anq_run_free",
        "anq_run_aborted",
        "anq_run_recovered",
        "anq_run_transcript_json",
        "anq_string_free",
        "anq_verify_transcript",
        "anq_swap_check",
        "anq_intercept_detection_probability",
        "typedef struct AnqRun AnqRun",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
