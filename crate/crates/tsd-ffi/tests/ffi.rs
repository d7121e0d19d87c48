use std::ffi::{CStr, CString};
use std::ptr;

use tsd_ffi::*;

fn new(src: &str, schedule: Option<&str>) -> (TsdStatus, *mut TsdMachine) {
    let src = CString::new(src).unwrap();
    let sched = schedule.map(|s| CString::new(s).unwrap());
    let mut m = ptr::null_mut();
    let st = unsafe { tsd_machine_new(src.as_ptr(), 0, sched.as_ref().map_or(ptr::null(), |s| s.as_ptr()), &mut m) };
    (st, m)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tsd_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn runs_a_program_and_reads_results() {
    let (st, m) = new("let x = ref 0 in let y = ref 1 in link x 2; link y 3; peek (deref y); step; peek (deref y)", None);
    assert_eq!(st, TsdStatus::Ok);
    let mut outcome = TsdOutcome::Stuck;
    let mut value = -1;
    unsafe {
        assert_eq!(tsd_machine_run(m, &mut outcome, &mut value), TsdStatus::Ok);
        assert_eq!((outcome, value), (TsdOutcome::Final, 3));
        let mut n = 0;
        assert_eq!(tsd_machine_peek_count(m, &mut n), TsdStatus::Ok);
        assert_eq!(n, 2);
        let mut v = 0;
        assert_eq!(tsd_machine_peek_at(m, 0, &mut v), TsdStatus::Ok);
        assert_eq!(v, 1);
        assert_eq!(tsd_machine_peek_at(m, 2, &mut v), TsdStatus::Range);
        assert!(last_error().contains("peek 2 of 2"));
        assert_eq!(tsd_machine_cell_count(m, &mut n), TsdStatus::Ok);
        assert_eq!(n, 2);
        assert_eq!(tsd_machine_cell_value(m, 0, &mut v), TsdStatus::Ok);
        assert_eq!(v, 2);
        assert_eq!(tsd_machine_step_count(m, &mut n), TsdStatus::Ok);
        assert_eq!(n, 1);
        tsd_machine_free(m);
    }
}

#[test]
fn error_codes() {
    let (st, m) = new("1 +", None);
    assert_eq!((st, m.is_null()), (TsdStatus::Parse, true));
    assert!(!last_error().is_empty());
    assert_eq!(new("1 2", None).0, TsdStatus::Type);
    assert_eq!(new("1", Some("fifo")).0, TsdStatus::Range);
    let bad = [0xffu8, 0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(tsd_machine_new(bad.as_ptr().cast(), 0, ptr::null(), &mut m), TsdStatus::Utf8);
        assert_eq!(tsd_machine_new(ptr::null(), 0, ptr::null(), &mut m), TsdStatus::Null);
        let mut n = 0;
        assert_eq!(tsd_machine_peek_count(ptr::null(), &mut n), TsdStatus::Null);
        tsd_machine_free(ptr::null_mut());
    }
}

#[test]
fn fuel_and_schedule() {
    let src = CString::new("(rec f. λx. f x) 0").unwrap();
    let mut m = ptr::null_mut();
    let mut outcome = TsdOutcome::Final;
    let mut v = 0;
    unsafe {
        assert_eq!(tsd_machine_new(src.as_ptr(), 1000, ptr::null(), &mut m), TsdStatus::Ok);
        tsd_machine_run(m, &mut outcome, &mut v);
        assert_eq!(outcome, TsdOutcome::FuelExhausted);
        tsd_machine_free(m);
    }
    let (st, m) = new("let a = ref 1 in link a (deref a + 1); step; step; deref a", Some("par:2"));
    assert_eq!(st, TsdStatus::Ok);
    unsafe {
        tsd_machine_run(m, &mut outcome, &mut v);
        tsd_machine_free(m);
    }
    assert_eq!((outcome, v), (TsdOutcome::Final, 3));
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tsd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tsd.h")).unwrap();
    for f in ["tsd_machine_new", "tsd_machine_run", "tsd_machine_peek_at", "tsd_machine_free", "tsd_last_error_message"] {
        assert!(h.contains(f), "{f}");
    }
    assert!(h.contains("typedef struct TsdMachine TsdMachine;"));
}
