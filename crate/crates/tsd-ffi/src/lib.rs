//! C ABI over the tsd machine. Machines are opaque heap handles; every call
//! returns a `TsdStatus` and writes results through out-pointers. After a
//! failure, `tsd_last_error_message` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tsd::machine::{Config, Machine, Outcome, Value};
use tsd::propagation::Schedule;
use tsd::translate::{translate_program, TranslateError};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    Parse = 3,
    Type = 4,
    /// Rust code panicked; the handle should be freed and not reused.
    Panic = 5,
    /// An index or argument was out of range.
    Range = 6,
}

/// How a run ended. Values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsdOutcome {
    Final = 0,
    Stuck = 2,
    FuelExhausted = 3,
    Invalid = 4,
}

/// Opaque machine handle.
pub struct TsdMachine {
    inner: Machine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (TsdStatus, String)>) -> TsdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TsdStatus::Panic
        }
    }
}

fn null(what: &str) -> (TsdStatus, String) {
    (TsdStatus::Null, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TsdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (TsdStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn handle<'a>(m: *const TsdMachine) -> Result<&'a Machine, (TsdStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("machine"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (TsdStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Parses, typechecks and translates `source`, then builds a machine.
///
/// `fuel` of 0 selects the default budget. `schedule` may be null for
/// round robin, or one of "rr", "rand:SEED", "par:K". On success
/// `*out_machine` owns a handle that must be released with `tsd_machine_free`.
///
/// # Safety
/// `source` and a non-null `schedule` must be NUL-terminated strings;
/// `out_machine` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_new(
    source: *const c_char,
    fuel: u64,
    schedule: *const c_char,
    out_machine: *mut *mut TsdMachine,
) -> TsdStatus {
    guard(|| {
        let slot = out(out_machine, "out_machine")?;
        *slot = ptr::null_mut();
        let src = text(source, "source")?;
        let mut config = Config::default();
        if fuel > 0 {
            config.fuel = fuel;
        }
        if !schedule.is_null() {
            config.schedule = text(schedule, "schedule")?.parse::<Schedule>().map_err(|e| (TsdStatus::Range, e))?;
        }
        let tr = translate_program(src).map_err(|e| match e {
            TranslateError::Parse(_) => (TsdStatus::Parse, e.to_string()),
            TranslateError::Type(_) => (TsdStatus::Type, e.to_string()),
        })?;
        let inner = Machine::new(tr, config).map_err(|e| (TsdStatus::Type, e.to_string()))?;
        *slot = Box::into_raw(Box::new(TsdMachine { inner }));
        Ok(())
    })
}

/// Runs to completion. `*out_value` receives the final integer, or 0 when
/// the result is not an integer or the run did not finish. After a Stuck
/// or Invalid outcome `tsd_last_error_message` holds the diagnosis.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; out-pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_run(
    machine: *mut TsdMachine,
    out_outcome: *mut TsdOutcome,
    out_value: *mut i64,
) -> TsdStatus {
    guard(|| {
        let m = &mut machine.as_mut().ok_or_else(|| null("machine"))?.inner;
        let outcome = out(out_outcome, "out_outcome")?;
        let value = out(out_value, "out_value")?;
        let o = m.run();
        *value = 0;
        *outcome = match &o {
            Outcome::Final { value: v, .. } => {
                if let Value::Int(n) = v {
                    *value = *n;
                }
                TsdOutcome::Final
            }
            Outcome::Stuck { diag, .. } => {
                set_error(diag.to_string());
                TsdOutcome::Stuck
            }
            Outcome::FuelExhausted { .. } => TsdOutcome::FuelExhausted,
            Outcome::Invalid { violations, .. } => {
                set_error(violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "));
                TsdOutcome::Invalid
            }
        };
        Ok(())
    })
}

/// Number of values peeked so far.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_peek_count(machine: *const TsdMachine, out_count: *mut usize) -> TsdStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(machine)?.peeks.len();
        Ok(())
    })
}

/// The `index`-th peeked value.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_peek_at(
    machine: *const TsdMachine,
    index: usize,
    out_value: *mut i64,
) -> TsdStatus {
    guard(|| {
        let m = handle(machine)?;
        let v = out(out_value, "out_value")?;
        *v = *m.peeks.get(index).ok_or_else(|| (TsdStatus::Range, format!("peek {index} of {}", m.peeks.len())))?;
        Ok(())
    })
}

/// Number of cells created so far.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_cell_count(machine: *const TsdMachine, out_count: *mut usize) -> TsdStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(machine)?.cell_values().len();
        Ok(())
    })
}

/// Current value of the `index`-th cell, in creation order.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_cell_value(
    machine: *const TsdMachine,
    index: usize,
    out_value: *mut i64,
) -> TsdStatus {
    guard(|| {
        let cells = handle(machine)?.cell_values();
        let v = out(out_value, "out_value")?;
        *v = *cells.get(index).ok_or_else(|| (TsdStatus::Range, format!("cell {index} of {}", cells.len())))?;
        Ok(())
    })
}

/// Number of propagation rounds run so far.
///
/// # Safety
/// `machine` must come from `tsd_machine_new`; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_step_count(machine: *const TsdMachine, out_count: *mut usize) -> TsdStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(machine)?.steps.len();
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `machine` must come from `tsd_machine_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tsd_machine_free(machine: *mut TsdMachine) {
    if !machine.is_null() {
        // a panic while dropping must not cross the boundary
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(machine))));
    }
}

/// Message for the last failed call on this thread, or "" if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn tsd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tsd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
