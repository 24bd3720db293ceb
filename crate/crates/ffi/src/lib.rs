//! C interface to the `hrbeam` optimizer.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an [`HrStatus`];
//! on failure the message is available from [`hr_last_error_message`] on the
//! same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hrbeam::baselines::SchemeId;
use hrbeam::io::{parse_scenario, solve_scenario, AngleUnit, RegionSpec, Scenario, ScenarioError, SchemeResult, SolveArtifact};
use hrbeam::model::{beamforming_gain, Beamformer, RotationState};
use hrbeam::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    SolverFailure = 4,
    NotFound = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrScheme {
    Hr6dma = 0,
    AntennaRa = 1,
    ArrayRa = 2,
    Nra = 3,
    Ars = 4,
    Csar = 5,
}

impl From<HrScheme> for SchemeId {
    fn from(s: HrScheme) -> Self {
        match s {
            HrScheme::Hr6dma => SchemeId::HR6DMA,
            HrScheme::AntennaRa => SchemeId::AntennaRA,
            HrScheme::ArrayRa => SchemeId::ArrayRA,
            HrScheme::Nra => SchemeId::NRA,
            HrScheme::Ars => SchemeId::ARS,
            HrScheme::Csar => SchemeId::CSAR,
        }
    }
}

/// Scheme from its numeric value; C callers may pass anything.
fn scheme_of(raw: u32) -> Option<SchemeId> {
    let s = match raw {
        0 => HrScheme::Hr6dma,
        1 => HrScheme::AntennaRa,
        2 => HrScheme::ArrayRa,
        3 => HrScheme::Nra,
        4 => HrScheme::Ars,
        5 => HrScheme::Csar,
        _ => return None,
    };
    Some(s.into())
}

/// Opaque scenario handle.
pub struct HrScenario(Scenario);

/// Opaque solve report handle.
pub struct HrReport(SolveArtifact);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HrStatus, msg: impl Into<String>) -> HrStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> HrStatus {
    let status = match e {
        Error::Config { .. } => HrStatus::ConfigError,
        Error::Constraint(_) | Error::Domain(_) | Error::Structure(_) => HrStatus::InvalidArgument,
        Error::Solver(_) => HrStatus::SolverFailure,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`HrStatus::Panic`].
fn guard(f: impl FnOnce() -> HrStatus) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(HrStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Scenario with every field at its default. Never NULL.
#[no_mangle]
pub extern "C" fn hr_scenario_default() -> *mut HrScenario {
    Box::into_raw(Box::new(HrScenario(Scenario::default())))
}

/// Parses a scenario from NUL-terminated JSON. Omitted fields take their
/// defaults.
///
/// # Safety
/// `json` must be NULL or a valid NUL-terminated string; `out` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn hr_scenario_from_json(json: *const c_char, out: *mut *mut HrScenario) -> HrStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(HrStatus::NullPointer, "null argument to hr_scenario_from_json");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(e) => return fail(HrStatus::InvalidArgument, format!("scenario is not UTF-8: {e}")),
        };
        match parse_scenario(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(HrScenario(s)));
                HrStatus::Ok
            }
            Err(ScenarioError::Invalid(e)) => from_error(&e),
            Err(e) => fail(HrStatus::ConfigError, e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_scenario_free(scenario: *mut HrScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Replaces the coverage region with the single interval `[lo, hi]` in
/// radians.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_scenario_set_region(scenario: *mut HrScenario, lo: f64, hi: f64) -> HrStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(HrStatus::NullPointer, "null scenario");
        };
        let region = RegionSpec {
            intervals: vec![(lo, hi)],
            units: AngleUnit::Rad,
        };
        if let Err(e) = region.coverage() {
            return from_error(&e);
        }
        s.0.region = region;
        HrStatus::Ok
    })
}

/// Sets the total number of sampled directions.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_scenario_set_total_q(scenario: *mut HrScenario, total_q: usize) -> HrStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(HrStatus::NullPointer, "null scenario");
        };
        if total_q == 0 {
            return fail(HrStatus::ConfigError, "total_q must be at least 1");
        }
        s.0.total_q = total_q;
        HrStatus::Ok
    })
}

/// Restricts the schemes solved by [`hr_solve`]. `schemes` holds `len`
/// [`HrScheme`] values.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `schemes` must be NULL or point
/// to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn hr_scenario_set_schemes(scenario: *mut HrScenario, schemes: *const u32, len: usize) -> HrStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(HrStatus::NullPointer, "null scenario");
        };
        if schemes.is_null() || len == 0 {
            return fail(HrStatus::InvalidArgument, "scheme list is empty");
        }
        let mut ids = Vec::with_capacity(len);
        for &raw in std::slice::from_raw_parts(schemes, len) {
            match scheme_of(raw) {
                Some(id) if !ids.contains(&id) => ids.push(id),
                Some(_) => {}
                None => return fail(HrStatus::InvalidArgument, format!("unknown scheme {raw}")),
            }
        }
        s.0.schemes = ids;
        HrStatus::Ok
    })
}

/// Solves every scheme of the scenario. Per-scheme failures do not fail the
/// call; they are listed in the report JSON and the scheme is absent from
/// the accessors.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hr_solve(scenario: *const HrScenario, out: *mut *mut HrReport) -> HrStatus {
    guard(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(HrStatus::NullPointer, "null argument to hr_solve");
        };
        match solve_scenario(&s.0) {
            Ok(a) => {
                *out = Box::into_raw(Box::new(HrReport(a)));
                HrStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_report_free(report: *mut HrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of schemes solved successfully; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_report_scheme_count(report: *const HrReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.results.len())
}

unsafe fn lookup<'a>(report: *const HrReport, scheme: u32) -> Result<&'a SchemeResult, HrStatus> {
    let r = report
        .as_ref()
        .ok_or_else(|| fail(HrStatus::NullPointer, "null report"))?;
    let id = scheme_of(scheme).ok_or_else(|| fail(HrStatus::InvalidArgument, format!("unknown scheme {scheme}")))?;
    r.0
        .result(id)
        .ok_or_else(|| fail(HrStatus::NotFound, format!("{id} is not in the report")))
}

unsafe fn scalar(report: *const HrReport, scheme: u32, out: *mut f64, get: fn(&SchemeResult) -> f64) -> HrStatus {
    guard(|| {
        if out.is_null() {
            return fail(HrStatus::NullPointer, "null output");
        }
        match lookup(report, scheme) {
            Ok(r) => {
                *out = get(r);
                HrStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Sampled worst-case gain (linear) of `scheme`.
///
/// # Safety
/// `report` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hr_report_worst_gain(report: *const HrReport, scheme: u32, out: *mut f64) -> HrStatus {
    scalar(report, scheme, out, |r| r.worst_gain)
}

/// Array rotation chosen for `scheme`, in radians.
///
/// # Safety
/// `report` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hr_report_psi_star(report: *const HrReport, scheme: u32, out: *mut f64) -> HrStatus {
    scalar(report, scheme, out, |r| r.psi_star)
}

/// Copies `values` into `buf` after writing the required length to `len`.
unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> HrStatus {
    if len.is_null() {
        return fail(HrStatus::NullPointer, "null length output");
    }
    *len = values.len();
    if cap < values.len() {
        return fail(HrStatus::BufferTooSmall, format!("need {} values, got {cap}", values.len()));
    }
    if buf.is_null() {
        return fail(HrStatus::NullPointer, "null buffer");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    HrStatus::Ok
}

/// Per-antenna boresight rotations of `scheme`. `*len` receives the antenna
/// count even when `cap` is too small.
///
/// # Safety
/// `report` must be NULL or a live handle; `buf` must hold `cap` writable
/// values; `len` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hr_report_phi(
    report: *const HrReport,
    scheme: u32,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HrStatus {
    guard(|| match lookup(report, scheme) {
        Ok(r) => copy_out(&r.phi, buf, cap, len),
        Err(s) => s,
    })
}

/// Beamforming weights of `scheme` as interleaved `(re, im)` pairs, so
/// `*len` is twice the antenna count.
///
/// # Safety
/// Same as [`hr_report_phi`].
#[no_mangle]
pub unsafe extern "C" fn hr_report_weights(
    report: *const HrReport,
    scheme: u32,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HrStatus {
    guard(|| match lookup(report, scheme) {
        Ok(r) => {
            let flat: Vec<f64> = r.w.weights.iter().flat_map(|z| [z.re, z.im]).collect();
            copy_out(&flat, buf, cap, len)
        }
        Err(s) => s,
    })
}

/// Full report as pretty JSON. Free with [`hr_string_free`]. NULL on error.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_report_to_json(report: *const HrReport) -> *mut c_char {
    let mut text = ptr::null_mut();
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(HrStatus::NullPointer, "null report");
        };
        match serde_json::to_string_pretty(&r.0).map(CString::new) {
            Ok(Ok(c)) => {
                text = c.into_raw();
                HrStatus::Ok
            }
            Ok(Err(e)) => fail(HrStatus::SolverFailure, e.to_string()),
            Err(e) => fail(HrStatus::SolverFailure, e.to_string()),
        }
    });
    text
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Gain toward `theta` of the scenario's array at rotation `psi` with
/// boresights `phi` and interleaved weights `w` (`2·n` values), where `n`
/// is the scenario's antenna count.
///
/// # Safety
/// `scenario` must be a live handle; `phi` must hold `n` values, `w` must
/// hold `2·n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_beamforming_gain(
    scenario: *const HrScenario,
    theta: f64,
    psi: f64,
    phi: *const f64,
    w: *const f64,
    out: *mut f64,
) -> HrStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(HrStatus::NullPointer, "null scenario");
        };
        if phi.is_null() || w.is_null() || out.is_null() {
            return fail(HrStatus::NullPointer, "null argument to hr_beamforming_gain");
        }
        let cfg = &s.0.array;
        let n = cfg.n_antennas;
        let phi = std::slice::from_raw_parts(phi, n).to_vec();
        let weights = std::slice::from_raw_parts(w, 2 * n)
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        let state = RotationState { psi, phi };
        *out = beamforming_gain(theta, &state, &Beamformer { weights }, cfg);
        HrStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, HrStatus::Panic);
        let msg = unsafe { CStr::from_ptr(hr_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
    }

    #[test]
    fn scheme_codes_cover_every_scheme() {
        let ids: Vec<SchemeId> = (0..6).filter_map(scheme_of).collect();
        assert_eq!(ids, SchemeId::ALL.to_vec());
        assert_eq!(scheme_of(6), None);
    }

    #[test]
    fn interior_nul_is_replaced() {
        set_error("a\0b");
        let msg = unsafe { CStr::from_ptr(hr_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
