//! C interface to `macjsc`.
//!
//! Structured values cross the boundary as UTF-8 JSON. Parsed inputs live
//! behind opaque handles that the caller releases with the matching `_free`
//! function, and every string returned by the library is released with
//! [`macjsc_string_free`]. Each fallible call returns a [`MacjscStatus`];
//! on failure [`macjsc_last_error`] describes the problem until the next
//! call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use macjsc::gaussian::{gmac_outer_bounds, GmacParams};
use macjsc::mc::{estimate_all, InputModel, McConfig};
use macjsc::mixture::{fit_mixture, FitOptions};
use macjsc::region::{check_theorem1, SystemSpec};
use macjsc::report::{reproduce, ReportOptions};
use macjsc::sim::{CodebookConfig, Simulator};
use macjsc::{Error, JointPmf, Variable};
use serde::Deserialize;

/// Result codes shared by every entry point. Values nested inside a larger
/// JSON document that fail validation are reported as `InvalidJson`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacjscStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidDistribution = 4,
    UnknownVariable = 5,
    InvalidSystem = 6,
    InvalidParameter = 7,
    BudgetExceeded = 8,
    OptimizerFailed = 9,
    Panic = 99,
}

/// Closed-form Gaussian MAC bounds in bits.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MacjscGmacBounds {
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
}

/// Parsed joint distribution.
pub struct MacjscPmf(JointPmf);

/// Parsed two-user system.
pub struct MacjscSystem(SystemSpec);

/// Simulator with its codebooks drawn.
pub struct MacjscSimulator(Simulator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MacjscStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NegativeProbability { .. }
            | Error::NotNormalized { .. }
            | Error::ShapeMismatch { .. }
            | Error::EmptyAlphabet(_)
            | Error::InvalidDistortion(_)
            | Error::AlphabetMismatch(_) => MacjscStatus::InvalidDistribution,
            Error::UnknownVariable(_)
            | Error::NameCollision(_)
            | Error::DuplicateVariable(_)
            | Error::OverlappingSets(_) => MacjscStatus::UnknownVariable,
            Error::InvalidSystem(_) | Error::NotOrthogonal { .. } | Error::MissingParam(_) => {
                MacjscStatus::InvalidSystem
            }
            Error::BudgetExceeded { .. } => MacjscStatus::BudgetExceeded,
            Error::OptimizerDiverged { .. } => MacjscStatus::OptimizerFailed,
            Error::Json(_) => MacjscStatus::InvalidJson,
            _ => MacjscStatus::InvalidParameter,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(MacjscStatus::InvalidJson, e.to_string())
    }
}

fn set_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).expect("nul removed"));
    });
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MacjscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            MacjscStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            MacjscStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(MacjscStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(MacjscStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

unsafe fn names<'a>(
    list: *const *const c_char,
    len: usize,
    what: &str,
) -> Result<Vec<&'a str>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if list.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(list, len)
        .iter()
        .map(|&p| text(p, what))
        .collect()
}

unsafe fn parse<T: for<'de> Deserialize<'de>>(p: *const c_char, name: &str) -> Result<T, Failure> {
    Ok(serde_json::from_str(text(p, name)?)?)
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(MacjscStatus::InvalidUtf8, e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn give_json<T: serde::Serialize>(v: &T, out: *mut *mut c_char) -> Result<(), Failure> {
    give_string(serde_json::to_string(v)?, out)
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(null("out"))
    } else {
        Ok(())
    }
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn macjsc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn macjsc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn macjsc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[derive(Deserialize)]
struct PmfRepr {
    variables: Vec<Variable>,
    probs: Vec<f64>,
}

/// Parses a joint pmf from `{"variables": [...], "probs": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn macjsc_pmf_from_json(
    json: *const c_char,
    out: *mut *mut MacjscPmf,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let raw: PmfRepr = parse(json, "json")?;
        let pmf = JointPmf::new(raw.variables, raw.probs)?;
        *out = Box::into_raw(Box::new(MacjscPmf(pmf)));
        Ok(())
    })
}

/// # Safety
/// `pmf` must come from [`macjsc_pmf_from_json`] and must not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn macjsc_pmf_free(pmf: *mut MacjscPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

/// H(A | B) in bits for variable name lists `a` and `given`.
///
/// # Safety
/// `pmf` must be a live handle, each list must hold the stated number of
/// NUL-terminated strings, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_pmf_entropy(
    pmf: *const MacjscPmf,
    a: *const *const c_char,
    a_len: usize,
    given: *const *const c_char,
    given_len: usize,
    out: *mut f64,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let pmf = handle(pmf, "pmf")?;
        *out = pmf
            .0
            .entropy(&names(a, a_len, "a")?, &names(given, given_len, "given")?)?;
        Ok(())
    })
}

/// I(A; B | C) in bits.
///
/// # Safety
/// As for [`macjsc_pmf_entropy`].
#[no_mangle]
pub unsafe extern "C" fn macjsc_pmf_mutual_info(
    pmf: *const MacjscPmf,
    a: *const *const c_char,
    a_len: usize,
    b: *const *const c_char,
    b_len: usize,
    given: *const *const c_char,
    given_len: usize,
    out: *mut f64,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let pmf = handle(pmf, "pmf")?;
        *out = pmf.0.mutual_info(
            &names(a, a_len, "a")?,
            &names(b, b_len, "b")?,
            &names(given, given_len, "given")?,
        )?;
        Ok(())
    })
}

/// Parses and validates a two-user system.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn macjsc_system_from_json(
    json: *const c_char,
    out: *mut *mut MacjscSystem,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let spec: SystemSpec = parse(json, "json")?;
        spec.validate()?;
        *out = Box::into_raw(Box::new(MacjscSystem(spec)));
        Ok(())
    })
}

/// # Safety
/// `system` must come from [`macjsc_system_from_json`] and must not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn macjsc_system_free(system: *mut MacjscSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Checks the system and returns its region report as JSON. `feasible`
/// receives 1 when every inequality and fidelity target holds, else 0; it
/// may be null.
///
/// # Safety
/// `system` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_system_check(
    system: *const MacjscSystem,
    feasible: *mut i32,
    out_json: *mut *mut c_char,
) -> MacjscStatus {
    guard(|| {
        check_out(out_json)?;
        let report = check_theorem1(&handle(system, "system")?.0)?;
        if !feasible.is_null() {
            *feasible = i32::from(report.feasible);
        }
        give_json(&report, out_json)
    })
}

/// Closed-form bounds of the Gaussian MAC with input correlation `rho`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_gmac_bounds(
    p1: f64,
    p2: f64,
    sigma_n2: f64,
    rho: f64,
    out: *mut MacjscGmacBounds,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let b = gmac_outer_bounds(&GmacParams::new(p1, p2, sigma_n2, rho)?)?;
        *out = MacjscGmacBounds {
            i1: b.i1,
            i2: b.i2,
            isum: b.isum,
        };
        Ok(())
    })
}

#[derive(Deserialize)]
struct FitRequest {
    source: JointPmf,
    rho: f64,
    #[serde(default = "two")]
    counts: Vec<usize>,
    #[serde(default)]
    options: FitOptions,
}

fn two() -> Vec<usize> {
    vec![2]
}

/// Mixture fit. Input `{"source", "rho", "counts"?, "options"?}`; output
/// the fit result.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_fit_json(
    json: *const c_char,
    out_json: *mut *mut c_char,
) -> MacjscStatus {
    guard(|| {
        check_out(out_json)?;
        let r: FitRequest = parse(json, "json")?;
        give_json(
            &fit_mixture(&r.source, r.rho, &r.counts, &r.options)?,
            out_json,
        )
    })
}

#[derive(Deserialize)]
struct McRequest {
    input: InputModel,
    #[serde(default)]
    config: McConfig,
}

/// Monte Carlo estimates of every supported target. Input
/// `{"input", "config"?}`; output a list of `[target, estimate]` pairs.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_mc_json(
    json: *const c_char,
    out_json: *mut *mut c_char,
) -> MacjscStatus {
    guard(|| {
        check_out(out_json)?;
        let r: McRequest = parse(json, "json")?;
        give_json(&estimate_all(&r.input, &r.config)?, out_json)
    })
}

/// Draws the codebooks of a simulator configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn macjsc_simulator_new(
    json: *const c_char,
    out: *mut *mut MacjscSimulator,
) -> MacjscStatus {
    guard(|| {
        check_out(out)?;
        let cfg: CodebookConfig = parse(json, "json")?;
        *out = Box::into_raw(Box::new(MacjscSimulator(Simulator::new(&cfg)?)));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from [`macjsc_simulator_new`] and must not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn macjsc_simulator_free(sim: *mut MacjscSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs every trial and returns the aggregate as JSON.
///
/// # Safety
/// `sim` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_simulator_run(
    sim: *const MacjscSimulator,
    out_json: *mut *mut c_char,
) -> MacjscStatus {
    guard(|| {
        check_out(out_json)?;
        give_json(&handle(sim, "sim")?.0.run(), out_json)
    })
}

/// Recomputes every reference claim. `options_json` may be null for the
/// defaults.
///
/// # Safety
/// `options_json` must be null or a NUL-terminated string; `out_json` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn macjsc_reproduce_json(
    options_json: *const c_char,
    out_json: *mut *mut c_char,
) -> MacjscStatus {
    guard(|| {
        check_out(out_json)?;
        let opts: ReportOptions = if options_json.is_null() {
            ReportOptions::default()
        } else {
            parse(options_json, "options_json")?
        };
        give_json(&reproduce(&opts)?, out_json)
    })
}
