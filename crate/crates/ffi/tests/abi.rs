use hyuntil_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn builtin(id: &str) -> *mut HyScenario {
    let mut s = ptr::null_mut();
    let st = unsafe { hy_scenario_builtin(cs(id).as_ptr(), &mut s) };
    assert_eq!(st, HyStatus::Ok);
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hy_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn bouncing_ball_simulates_to_zeno() {
    let s = builtin("bouncing-ball");
    assert_eq!(unsafe { hy_scenario_dim(s) }, 2);
    let x0 = [0.0, 2.0];
    let mut arcs = ptr::null_mut();
    let st = unsafe { hy_simulate(s, x0.as_ptr(), 2, ptr::null(), &mut arcs) };
    assert_eq!(st, HyStatus::Ok);
    assert_eq!(unsafe { hy_arcs_len(arcs) }, 1);
    let mut zeno = false;
    assert_eq!(unsafe { hy_arc_is_zeno(arcs, 0, &mut zeno) }, HyStatus::Ok);
    assert!(zeno);
    let (mut t, mut j) = (0.0, 0usize);
    assert_eq!(unsafe { hy_arc_final_time(arcs, 0, &mut t, &mut j) }, HyStatus::Ok);
    assert!(t < 8.0 && j >= 10);
    let mut buf = [0.0; 1];
    assert_eq!(
        unsafe { hy_arc_final_state(arcs, 0, buf.as_mut_ptr(), 1) },
        HyStatus::Dimension
    );
    assert_eq!(unsafe { hy_arc_is_zeno(arcs, 5, &mut zeno) }, HyStatus::OutOfRange);
    assert!(last_error().contains("out of range"));
    unsafe {
        hy_arcs_free(arcs);
        hy_scenario_free(s);
    }
}

#[test]
fn bad_initial_state_and_unknown_scenario() {
    let s = builtin("timer");
    let x0 = [-1.0];
    let mut arcs = ptr::null_mut();
    let st = unsafe { hy_simulate(s, x0.as_ptr(), 1, ptr::null(), &mut arcs) };
    assert_eq!(st, HyStatus::InitialState);
    assert!(arcs.is_null());
    unsafe { hy_scenario_free(s) };

    let mut s = ptr::null_mut();
    let st = unsafe { hy_scenario_builtin(cs("nope").as_ptr(), &mut s) };
    assert_eq!(st, HyStatus::Config);
    assert!(s.is_null());
}

#[test]
fn monitor_and_certify_report_json() {
    let s = builtin("thermostat");
    let settings = cs("grid_res = 16\nmonitor_samples = 8\n");
    let mut v = HyVerdict::Unknown;
    let mut rep = ptr::null_mut();
    let st = unsafe { hy_monitor(s, ptr::null(), settings.as_ptr(), &mut v, &mut rep) };
    assert_eq!(st, HyStatus::Ok, "{}", last_error());
    assert_eq!(v, HyVerdict::Satisfied);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(rep) }.to_str().unwrap()).unwrap();
    assert_eq!(json["verdict"], "satisfied");
    unsafe { hy_string_free(rep) };

    let mut code = -1;
    let st = unsafe {
        hy_certify(
            s,
            cs("strong-eci").as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut code,
            ptr::null_mut(),
        )
    };
    assert_eq!(st, HyStatus::Ok, "{}", last_error());
    assert_eq!(code, 0);
    let st = unsafe {
        hy_certify(
            s,
            cs("bogus").as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut code,
            ptr::null_mut(),
        )
    };
    assert_eq!(st, HyStatus::Config);
    let bad = cs("grid_rez = 3");
    let st = unsafe {
        hy_certify(
            s,
            cs("weak").as_ptr(),
            ptr::null(),
            bad.as_ptr(),
            &mut code,
            ptr::null_mut(),
        )
    };
    assert_eq!(st, HyStatus::Config);
    unsafe { hy_scenario_free(s) };
}

#[test]
fn toml_scenario_round_trip() {
    let src = cs(r#"
name = "timer"
coords = ["x"]
[system]
C = "x >= 0 & x <= 1"
F = ["1"]
D = "x >= 1"
G = ["0"]
[grid]
lo = [-0.5]
hi = [2.0]
"#);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hy_scenario_from_toml(src.as_ptr(), &mut s) }, HyStatus::Ok);
    assert_eq!(unsafe { hy_scenario_dim(s) }, 1);
    unsafe { hy_scenario_free(s) };
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { hy_scenario_from_toml(cs("name = 1").as_ptr(), &mut s) },
        HyStatus::Config
    );
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hyuntil.h");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler, skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
