use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use frobkit_ffi::*;

fn cstrs(xs: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = xs.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs = owned.iter().map(|s| s.as_ptr()).collect();
    (owned, ptrs)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fk_last_error()) }.to_str().unwrap().to_string()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    fk_string_free(s);
    out
}

fn chart(names: &[&str], complex: bool) -> *mut FkChart {
    let (_keep, ptrs) = cstrs(names);
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { fk_chart_new(ptrs.as_ptr(), ptrs.len(), complex, &mut c) }, FkStatus::Ok);
    c
}

fn parse(c: *const FkChart, src: &str) -> Result<*mut FkField, FkStatus> {
    let s = CString::new(src).unwrap();
    let mut f = ptr::null_mut();
    match unsafe { fk_field_parse(c, s.as_ptr(), &mut f) } {
        FkStatus::Ok => Ok(f),
        e => Err(e),
    }
}

const CUBIC: &str = "kind = \"potential\"\nchart = [\"t\"]\n[potential]\nmetric = [[\"1\"]]\npotential = \"t^3/6\"\nunit = \"t\"\n[legendre]\nfield = [\"1\"]\n";

#[test]
fn field_round_trip_and_derivative() {
    let c = chart(&["x", "y"], false);
    assert_eq!(unsafe { fk_chart_dim(c) }, 2);
    let f = parse(c, "x^2*y+exp(2*x)").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fk_field_diff(f, 0, &mut d) }, FkStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fk_field_to_string(d, &mut s) }, FkStatus::Ok);
    let text = unsafe { take(s) };
    let back = parse(c, &text).unwrap();
    let mut s2 = ptr::null_mut();
    unsafe { fk_field_to_string(back, &mut s2) };
    assert_eq!(unsafe { take(s2) }, text);

    let (_keep, at) = cstrs(&["0", "3"]);
    let (mut re, mut im) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { fk_field_eval(d, at.as_ptr(), 2, &mut re, &mut im) }, FkStatus::Ok);
    assert_eq!((re, im), (2.0, 0.0));
    unsafe {
        fk_field_free(back);
        fk_field_free(d);
        fk_field_free(f);
        fk_chart_free(c);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let c = chart(&["x"], false);
    assert_eq!(parse(c, "x +* 1"), Err(FkStatus::Parse));
    assert!(!last_error().is_empty());
    assert_eq!(parse(ptr::null(), "x"), Err(FkStatus::NullPointer));
    assert_eq!(last_error(), "chart is null");
    let f = parse(c, "x").unwrap();
    assert!(last_error().is_empty());
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fk_field_diff(f, 1, &mut d) }, FkStatus::OutOfRange);
    assert!(d.is_null());
    let (_keep, at) = cstrs(&["x"]);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { fk_field_eval(f, at.as_ptr(), 1, &mut re, &mut im) }, FkStatus::Invalid);
    let bad = [0xffu8, 0];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { fk_field_parse(c, bad.as_ptr().cast(), &mut g) }, FkStatus::Utf8);
    let (_keep, dup) = cstrs(&["x", "x"]);
    let mut c2 = ptr::null_mut();
    assert_eq!(unsafe { fk_chart_new(dup.as_ptr(), 2, false, &mut c2) }, FkStatus::Invalid);
    unsafe {
        fk_field_free(f);
        fk_chart_free(c);
        fk_field_free(ptr::null_mut());
        fk_chart_free(ptr::null_mut());
        fk_outcome_free(ptr::null_mut());
        fk_string_free(ptr::null_mut());
    }
}

#[test]
fn complex_charts_expose_conjugates() {
    let c = chart(&["z"], true);
    let f = parse(c, "z*z_bar").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fk_field_diff(f, 1, &mut d) }, FkStatus::Ok);
    let mut s = ptr::null_mut();
    unsafe { fk_field_to_string(d, &mut s) };
    assert_eq!(unsafe { take(s) }, "z");
    let (_keep, at) = cstrs(&["1+2*I"]);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { fk_field_eval(f, at.as_ptr(), 1, &mut re, &mut im) }, FkStatus::Ok);
    assert_eq!((re, im), (5.0, 0.0));
    unsafe {
        fk_field_free(d);
        fk_field_free(f);
        fk_chart_free(c);
    }
}

#[test]
fn run_reports_and_emits() {
    let cmd = CString::new("add-variable").unwrap();
    let src = CString::new(CUBIC).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fk_run(cmd.as_ptr(), src.as_ptr(), ptr::null(), &mut out) }, FkStatus::Ok);
    assert_eq!(unsafe { fk_outcome_exit_code(out) }, 0);
    let report = unsafe { take(fk_outcome_report(out)) };
    assert!(report.contains("verdict = \"pass\""));
    let emitted = unsafe { take(fk_outcome_emitted(out)) };
    unsafe { fk_outcome_free(out) };

    let check = CString::new("check-frobenius").unwrap();
    let again = CString::new(emitted).unwrap();
    let flags = FkFlags { points: 4, seed: 9, tol: -1.0 };
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fk_run(check.as_ptr(), again.as_ptr(), &flags, &mut out) }, FkStatus::Ok);
    assert_eq!(unsafe { fk_outcome_exit_code(out) }, 0);
    assert!(unsafe { fk_outcome_emitted(out) }.is_null());
    let report = unsafe { take(fk_outcome_report(out)) };
    assert!(report.contains("points = 4") && report.contains("seed = 9") && report.contains("tol = \"1e-9\""));
    unsafe { fk_outcome_free(out) };
}

#[test]
fn run_distinguishes_call_errors_from_input_errors() {
    let src = CString::new("kind = \"potential\"\nchart = [\"t\"\n").unwrap();
    let cmd = CString::new("check-frobenius").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fk_run(cmd.as_ptr(), src.as_ptr(), ptr::null(), &mut out) }, FkStatus::Ok);
    assert_eq!(unsafe { fk_outcome_exit_code(out) }, 2);
    unsafe { fk_outcome_free(out) };
    let unknown = CString::new("check-everything").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fk_run(unknown.as_ptr(), src.as_ptr(), ptr::null(), &mut out) }, FkStatus::Invalid);
    assert!(out.is_null());
    assert!(last_error().contains("check-everything"));
    assert_eq!(unsafe { fk_outcome_exit_code(ptr::null()) }, 2);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(fk_version()) }.to_str().unwrap();
    assert_eq!(v, concat!("frobkit ", env!("CARGO_PKG_VERSION")));
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/frobkit.h");
    assert!(std::fs::read_to_string(&header).unwrap().contains("fk_run"));
    let lib = target_dir().join("libfrobkit_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "2*x*y\nok frobkit 0.1.0\n");
}
