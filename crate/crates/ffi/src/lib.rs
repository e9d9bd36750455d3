//! C ABI over `kpo_aqc`.
//!
//! Objects cross the boundary as opaque handles created by `kpo_*_new`-style
//! constructors and released by the matching `kpo_*_free`. Every fallible
//! call returns a [`KpoStatus`]; on failure [`kpo_last_error`] describes the
//! cause. Strings returned to the caller are freed with [`kpo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use kpo_aqc::driver::{run_protocol, InstanceSource, RunConfig, RunReport};
use kpo_aqc::fock::FockCutoff;
use kpo_aqc::ising::{brute_force_solve, random_instance, InstanceDocument, IsingInstance};
use kpo_aqc::readout::SignProjector;
use kpo_aqc::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KpoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    NumericalFailure = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// An Ising instance.
pub struct KpoInstance {
    inner: IsingInstance,
}

/// A run configuration.
pub struct KpoConfig {
    inner: RunConfig,
}

/// The result document of a run.
pub struct KpoReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: KpoStatus, msg: impl Into<String>) -> KpoStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> KpoStatus {
    let status = if e.is_numerical() {
        KpoStatus::NumericalFailure
    } else {
        KpoStatus::InvalidConfig
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> KpoStatus + UnwindSafe) -> KpoStatus {
    set_error("");
    catch_unwind(f).unwrap_or_else(|_| fail(KpoStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, KpoStatus> {
    if s.is_null() {
        return Err(fail(KpoStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(KpoStatus::InvalidUtf8, "string is not valid UTF-8"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> KpoStatus {
    *out = Box::into_raw(Box::new(value));
    KpoStatus::Ok
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(KpoStatus::NullPointer, concat!("null argument `", stringify!($p), "`"));
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kpo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn kpo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kpo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The bundled hard four-spin instance.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_hard(out: *mut *mut KpoInstance) -> KpoStatus {
    guard(|| {
        nonnull!(out);
        put(
            out,
            KpoInstance {
                inner: IsingInstance::hard_instance(),
            },
        )
    })
}

/// Parses an instance document (1-based indices, decimal-string values).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_from_json(json: *const c_char, out: *mut *mut KpoInstance) -> KpoStatus {
    guard(|| {
        nonnull!(out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match InstanceDocument::from_json(text).and_then(|d| d.to_instance()) {
            Ok(inner) => put(out, KpoInstance { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Random instance with couplings and fields drawn in `[-1, 1]` and
/// normalized to maximum magnitude 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_random(n: usize, seed: u64, out: *mut *mut KpoInstance) -> KpoStatus {
    guard(|| {
        nonnull!(out);
        match random_instance(n, seed) {
            Ok(inner) => put(out, KpoInstance { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Number of spins; 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_size(inst: *const KpoInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.size())
}

/// Exhaustive minimization. Writes `±1` into `spins[0..len]` (`len` must be
/// at least the instance size) and the minimum energy into `energy`.
///
/// # Safety
/// `spins` must point to `len` writable bytes; `inst` and `energy` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_brute_force(
    inst: *const KpoInstance,
    spins: *mut i8,
    len: usize,
    energy: *mut f64,
) -> KpoStatus {
    guard(|| {
        nonnull!(inst, spins, energy);
        let inst = &(*inst).inner;
        if len < inst.size() {
            return fail(
                KpoStatus::BufferTooSmall,
                format!("spin buffer holds {len}, need {}", inst.size()),
            );
        }
        match brute_force_solve(inst) {
            Ok((s, e)) => {
                ptr::copy_nonoverlapping(s.spins().as_ptr(), spins, s.len());
                *energy = e;
                KpoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kpo_instance_free(inst: *mut KpoInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Parses a run-configuration document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_config_from_json(json: *const c_char, out: *mut *mut KpoConfig) -> KpoStatus {
    guard(|| {
        nonnull!(out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_json(text) {
            Ok(inner) => put(out, KpoConfig { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Replaces the configured instance with a copy of `inst`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn kpo_config_set_instance(cfg: *mut KpoConfig, inst: *const KpoInstance) -> KpoStatus {
    guard(|| {
        nonnull!(cfg, inst);
        (*cfg).inner.instance = InstanceSource::Inline(InstanceDocument::from_instance(&(*inst).inner));
        KpoStatus::Ok
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kpo_config_free(cfg: *mut KpoConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured protocol.
///
/// # Safety
/// `cfg` must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_run_protocol(cfg: *const KpoConfig, out: *mut *mut KpoReport) -> KpoStatus {
    guard(|| {
        nonnull!(cfg, out);
        match run_protocol(&(*cfg).inner) {
            Ok(inner) => put(out, KpoReport { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Failure probability, success probability and residual energy of a run.
/// Any output pointer may be null.
///
/// # Safety
/// `report` must be live; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn kpo_report_metrics(
    report: *const KpoReport,
    failure: *mut f64,
    success: *mut f64,
    residual: *mut f64,
) -> KpoStatus {
    guard(|| {
        nonnull!(report);
        let m = &(*report).inner.result.metrics;
        for (p, v) in [
            (failure, m.failure_probability),
            (success, m.success_probability),
            (residual, m.residual_energy),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        KpoStatus::Ok
    })
}

/// The full result document as JSON; free with [`kpo_string_free`].
///
/// # Safety
/// `report` must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_report_to_json(report: *const KpoReport, out: *mut *mut c_char) -> KpoStatus {
    guard(|| {
        nonnull!(report, out);
        match serde_json::to_string_pretty(&(*report).inner) {
            Ok(s) => {
                *out = CString::new(s).unwrap_or_default().into_raw();
                KpoStatus::Ok
            }
            Err(e) => fail(KpoStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kpo_report_free(report: *mut KpoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Matrix element `<m|P+|n>` of the positive-quadrature projector in a
/// `levels`-state Fock basis.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kpo_sign_projector_entry(levels: usize, m: usize, n: usize, out: *mut f64) -> KpoStatus {
    guard(|| {
        nonnull!(out);
        let cutoff = match FockCutoff::new(levels) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        if m >= levels || n >= levels {
            return fail(
                KpoStatus::InvalidConfig,
                format!("indices ({m}, {n}) outside {levels} levels"),
            );
        }
        *out = SignProjector::cached(cutoff).plus(m, n);
        KpoStatus::Ok
    })
}
