//! C interface to `pumped_lindblad`.
//!
//! Every call returns a [`PlStatus`]. On failure the message is available
//! from [`pl_last_error_message`] on the same thread. Strings handed out by the
//! library are released with [`pl_string_free`], models with [`pl_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pumped_lindblad::cli;
use pumped_lindblad::config::{Model, RunConfig};
use pumped_lindblad::evolution::{evolve, level_populations, stationary_state, uniform_grid, EvolveOptions};
use pumped_lindblad::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque handle to a validated model.
pub struct PlModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(err: &Error) -> PlStatus {
    match cli::exit_code(err) {
        cli::EXIT_CONFIG => PlStatus::Config,
        _ => PlStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PlStatus, String)>) -> PlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (PlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (PlStatus, String) {
    (PlStatus::NullPointer, "null pointer argument".into())
}

unsafe fn model_ref<'a>(m: *const PlModel) -> Result<&'a Model, (PlStatus, String)> {
    m.as_ref().map(|m| &m.model).ok_or_else(null)
}

unsafe fn hand_out(s: String, out: *mut *mut c_char) -> Result<(), (PlStatus, String)> {
    let c = CString::new(s).map_err(|_| (PlStatus::Numerical, "output contains a NUL byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Parses and validates a JSON run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_model_from_json(json: *const c_char, out: *mut *mut PlModel) -> PlStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json).to_str().map_err(|_| (PlStatus::InvalidUtf8, "configuration is not UTF-8".to_string()))?;
        let cfg = RunConfig::from_json(text).map_err(lib_err)?;
        let model = cli::build_model(&cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PlModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`pl_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pl_model_free(model: *mut PlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Assumption report as JSON.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_check_report(model: *const PlModel, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null());
        }
        let report = cli::assumption_report(m).map_err(lib_err)?;
        hand_out(report.to_json(), out)
    })
}

/// Trajectory CSV over the configured time span.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_evolve_csv(model: *const PlModel, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null());
        }
        let sim = &m.config.sim;
        let t_end = m.t_end();
        let rho0 = m.initial_state().map_err(lib_err)?;
        let traj = evolve(&m.bundle, &rho0, t_end, &uniform_grid(t_end, sim.n_out), EvolveOptions { rtol: sim.rtol, atol: sim.atol })
            .map_err(lib_err)?;
        hand_out(traj.to_csv(&m.atom), out)
    })
}

/// Floquet report as JSON; `order_check` adds the Kato order measurement.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_floquet_report(model: *const PlModel, order_check: bool, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null());
        }
        let report = cli::floquet_report(m, order_check).map_err(lib_err)?;
        hand_out(report.to_json(), out)
    })
}

/// Level populations of the stationary state of the averaged generator.
/// `written` always receives the number of levels; when `len` is smaller the
/// call returns `PL_STATUS_BUFFER_TOO_SMALL` and writes nothing to `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles (or be null with `len == 0`),
/// `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pl_stationary_populations(model: *const PlModel, out: *mut f64, len: usize, written: *mut usize) -> PlStatus {
    guard(|| {
        let m = model_ref(model)?;
        if written.is_null() {
            return Err(null());
        }
        let rho = stationary_state(&m.bundle.averaged_generator()).map_err(lib_err)?;
        let pops = level_populations(&m.atom, rho.matrix());
        *written = pops.len();
        if len < pops.len() {
            return Err((PlStatus::BufferTooSmall, format!("need room for {} populations", pops.len())));
        }
        if out.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(out, pops.len()).copy_from_slice(&pops);
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
