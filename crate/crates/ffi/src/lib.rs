//! C ABI over the key-length calculator.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every fallible call returns a `DmcvqkdStatus`; on
//! failure `dmcvqkd_last_error_message` gives the reason for the calling
//! thread. Strings returned by the library must go back through
//! `dmcvqkd_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dmcvqkd::config::RunConfig;
use dmcvqkd::finite_key::KeyLengthReport;
use dmcvqkd::{Error, TwoModeCovariance};

/// Opaque run configuration.
pub struct DmcvqkdConfig(RunConfig);

/// Opaque key-length result.
pub struct DmcvqkdKeyReport(KeyLengthReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmcvqkdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    NonPhysical = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Terms of the key-length formula, all in bits.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DmcvqkdKeyTerms {
    pub raw_bits: f64,
    pub h_mle: f64,
    pub holevo_f: f64,
    pub entropy_term: f64,
    pub holevo_term: f64,
    pub leak_ec: f64,
    pub delta_aep: f64,
    pub delta_ent: f64,
    pub l: f64,
    pub eps_total: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DmcvqkdSpectrum {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DmcvqkdStatus {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::UnknownAxis(_) => DmcvqkdStatus::Config,
        Error::NonPhysicalCovariance(_) => DmcvqkdStatus::NonPhysical,
        Error::Io(_) => DmcvqkdStatus::Io,
        Error::Truncation { .. } | Error::Overflow(_) => DmcvqkdStatus::Numerical,
        _ => DmcvqkdStatus::Domain,
    }
}

/// Runs `f`, mapping errors and panics onto status codes.
fn guard<F: FnOnce() -> Result<(), (DmcvqkdStatus, String)>>(f: F) -> DmcvqkdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmcvqkdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside dmcvqkd".into());
            DmcvqkdStatus::Panic
        }
    }
}

fn lib(e: Error) -> (DmcvqkdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (DmcvqkdStatus, String) {
    (DmcvqkdStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (DmcvqkdStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (DmcvqkdStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (DmcvqkdStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn in_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, (DmcvqkdStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dmcvqkd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_config_from_json(json: *const c_char, out: *mut *mut DmcvqkdConfig) -> DmcvqkdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(str_arg(json, "json")?).map_err(lib)?;
        cfg.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(DmcvqkdConfig(cfg)));
        Ok(())
    })
}

/// Replaces one numeric field, e.g. "transmittance". The handle is left
/// unchanged on failure.
///
/// # Safety
/// `cfg` must come from `dmcvqkd_config_from_json`; `name` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_config_set(cfg: *mut DmcvqkdConfig, name: *const c_char, value: f64) -> DmcvqkdStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        cfg.0 = cfg.0.with_field(str_arg(name, "name")?, value).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_config_free(cfg: *mut DmcvqkdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Expected-case key length for the configured channel.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_keyrate(cfg: *const DmcvqkdConfig, out: *mut *mut DmcvqkdKeyReport) -> DmcvqkdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = in_arg(cfg, "cfg")?;
        let o = dmcvqkd::workflow::keyrate(&cfg.0).map_err(lib)?;
        *out = Box::into_raw(Box::new(DmcvqkdKeyReport(o.key)));
        Ok(())
    })
}

/// Key length in bits (may be negative); NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_report_length(r: *const DmcvqkdKeyReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.l)
}

/// 1 if the key length is positive, 0 otherwise (including null).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_report_feasible(r: *const DmcvqkdKeyReport) -> i32 {
    r.as_ref().map_or(0, |r| r.0.feasible as i32)
}

/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_report_terms(r: *const DmcvqkdKeyReport, out: *mut DmcvqkdKeyTerms) -> DmcvqkdStatus {
    guard(|| {
        let r = &in_arg(r, "report")?.0;
        *out_arg(out, "out")? = DmcvqkdKeyTerms {
            raw_bits: r.raw_bits,
            h_mle: r.h_mle,
            holevo_f: r.holevo_f,
            entropy_term: r.entropy_term,
            holevo_term: r.holevo_term,
            leak_ec: r.leak_ec,
            delta_aep: r.delta_aep,
            delta_ent: r.delta_ent,
            l: r.l,
            eps_total: r.eps_total,
        };
        Ok(())
    })
}

/// Header plus one row, as written to keyrate.csv's key columns. Free the
/// result with `dmcvqkd_string_free`.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_report_to_csv(r: *const DmcvqkdKeyReport, out: *mut *mut c_char) -> DmcvqkdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = dmcvqkd::report::key_report_csv(&in_arg(r, "report")?.0).map_err(lib)?;
        *out = CString::new(text)
            .map_err(|e| (DmcvqkdStatus::Numerical, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_report_free(r: *mut DmcvqkdKeyReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Holevo bound (bits) for the covariance (a, b, c).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_holevo_f(a: f64, b: f64, c: f64, out: *mut f64) -> DmcvqkdStatus {
    guard(|| {
        *out_arg(out, "out")? = dmcvqkd::gaussian::holevo_f(a, b, c).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_symplectic_eigenvalues(a: f64, b: f64, c: f64, out: *mut DmcvqkdSpectrum) -> DmcvqkdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cov = TwoModeCovariance::new(a, b, c).map_err(lib)?;
        let s = dmcvqkd::symplectic_eigenvalues(&cov).map_err(lib)?;
        *out = DmcvqkdSpectrum { nu1: s.nu1, nu2: s.nu2, nu3: s.nu3 };
        Ok(())
    })
}

/// Gaussian-input and binary-input AWGN capacities at SNR `s`.
///
/// # Safety
/// `gauss` and `biawgn` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dmcvqkd_capacities(s: f64, gauss: *mut f64, biawgn: *mut f64) -> DmcvqkdStatus {
    guard(|| {
        let g = out_arg(gauss, "gauss")?;
        let b = out_arg(biawgn, "biawgn")?;
        (*g, *b) = dmcvqkd::reconciliation::capacities(s).map_err(lib)?;
        Ok(())
    })
}
