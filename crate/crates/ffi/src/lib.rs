//! C interface to `pt-cs`.
//!
//! Handles (`PtParams`, `PtState`, `PtReport`) are opaque and owned by the
//! caller once returned; release each with its `_free` function. Every entry
//! point returns a `PtStatus`; on failure `pt_last_error()` describes the
//! most recent error on the calling thread.

use num_complex::Complex64 as C64;
use pt_cs::states::{construct, gk_mean_g, kp_from_z};
use pt_cs::verify::{run_check, SuiteConfig};
use pt_cs::{CsLabel, GkLabel, IsLabel, KpLabel, PotentialParams, StateVector, VerifyReport};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    /// An argument is outside the domain of the operation.
    Domain = 1,
    /// A computation failed to converge or produced non-finite values.
    Numeric = 2,
    NullPointer = 3,
    /// The output buffer is shorter than required.
    BufferTooSmall = 4,
    /// Input string is not valid UTF-8.
    InvalidString = 5,
    Panic = 6,
}

/// Potential parameters.
pub struct PtParams(PotentialParams);

/// A truncated Fock-space state.
pub struct PtState(StateVector);

/// Result of one verification check.
pub struct PtReport {
    report: VerifyReport,
    name: CString,
    keys: Vec<CString>,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtVariances {
    pub dw2: f64,
    pub dp2: f64,
    pub mean_g: f64,
    pub mean_f: f64,
    /// `dw2 * dp2 - (mean_g^2 + mean_f^2) / 4`.
    pub rs_residual: f64,
}

/// Quadrature and truncation sizes for verification checks.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PtSuiteConfig {
    pub dim: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub grid_nodes: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

const NAMES: [&CStr; 10] = [
    c"displacement-oracle",
    c"cn-agreement",
    c"pi-recursion",
    c"kp-identity",
    c"gk-measure-index",
    c"gk-action",
    c"temporal-stability",
    c"mean-g",
    c"intelligent-states",
    c"position-basis",
];

struct Failure(PtStatus, String);

impl From<pt_cs::Error> for Failure {
    fn from(e: pt_cs::Error) -> Self {
        let status = match e {
            pt_cs::Error::Domain(_) => PtStatus::Domain,
            _ => PtStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn call(f: impl FnOnce() -> Result<(), Failure>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            PtStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pt_params_new(kappa: f64, kappap: f64, a: f64, alpha: f64, out: *mut *mut PtParams) -> PtStatus {
    call(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = PotentialParams::new(kappa, kappap, a, alpha)?;
        out.write(boxed(PtParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from `pt_params_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_params_free(params: *mut PtParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// `e_n = n (n + kappa + kappa')`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_energy(params: *const PtParams, n: usize, out: *mut f64) -> PtStatus {
    call(|| {
        let p = borrow(params, "params")?;
        put(out, pt_cs::operators::energy(&p.0, n), "out")
    })
}

unsafe fn make_state(params: *const PtParams, out: *mut *mut PtState, label: impl FnOnce(&PotentialParams) -> Result<StateVector, pt_cs::Error>) -> PtStatus {
    call(|| {
        let p = borrow(params, "params")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let st = label(&p.0)?;
        out.write(boxed(PtState(st)));
        Ok(())
    })
}

/// Displacement state with label `zeta` (`|zeta| < 1`).
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_kp(params: *const PtParams, zeta_re: f64, zeta_im: f64, alpha: f64, dim: usize, out: *mut *mut PtState) -> PtStatus {
    make_state(params, out, |p| construct(p, &CsLabel::Kp(KpLabel::new(C64::new(zeta_re, zeta_im), alpha)?), dim))
}

/// Displacement state labelled by the displacement parameter `z`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_kp_from_z(params: *const PtParams, z_re: f64, z_im: f64, alpha: f64, dim: usize, out: *mut *mut PtState) -> PtStatus {
    make_state(params, out, |p| kp_from_z(p, C64::new(z_re, z_im), alpha, dim))
}

/// Annihilation eigenstate with eigenvalue `z`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_gk(params: *const PtParams, z_re: f64, z_im: f64, alpha: f64, dim: usize, out: *mut *mut PtState) -> PtStatus {
    make_state(params, out, |p| construct(p, &CsLabel::Gk(GkLabel { z: C64::new(z_re, z_im), alpha }), dim))
}

/// Intelligent state solving `(W + i lambda P) psi = sqrt(2) z psi`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_is(
    params: *const PtParams,
    z_re: f64,
    z_im: f64,
    lambda_re: f64,
    lambda_im: f64,
    alpha: f64,
    dim: usize,
    out: *mut *mut PtState,
) -> PtStatus {
    let label = IsLabel { z: C64::new(z_re, z_im), lambda: C64::new(lambda_re, lambda_im), alpha };
    make_state(params, out, |p| construct(p, &CsLabel::Is(label), dim))
}

/// # Safety
/// `state` must be null or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn pt_state_free(state: *mut PtState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of retained levels; 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn pt_state_dim(state: *const PtState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// Upper bound on the probability mass beyond the last level; NaN for a null handle.
///
/// # Safety
/// `state` must be null or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn pt_state_tail_bound(state: *const PtState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.tail_bound)
}

/// Copies the coefficients into `re[0..dim]` and `im[0..dim]`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pt_state_coefficients(state: *const PtState, re: *mut f64, im: *mut f64, len: usize) -> PtStatus {
    call(|| {
        let s = borrow(state, "state")?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let dim = s.0.dim();
        if len < dim {
            return Err(Failure(PtStatus::BufferTooSmall, format!("buffers hold {len} values, state has {dim}")));
        }
        for (n, c) in s.0.coeffs.iter().enumerate() {
            re.add(n).write(c.re);
            im.add(n).write(c.im);
        }
        Ok(())
    })
}

/// New state `e^{-iHt}|state>`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_evolve(state: *const PtState, t: f64, out: *mut *mut PtState) -> PtStatus {
    call(|| {
        let s = borrow(state, "state")?;
        if !t.is_finite() {
            return Err(Failure(PtStatus::Domain, "t must be finite".into()));
        }
        put(out, boxed(PtState(s.0.evolved(t))), "out")
    })
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_state_variances(state: *const PtState, out: *mut PtVariances) -> PtStatus {
    call(|| {
        let s = borrow(state, "state")?;
        let v = pt_cs::operators::variance_pair(&s.0)?;
        let rs_residual = v.rs_residual();
        put(out, PtVariances { dw2: v.dw2, dp2: v.dp2, mean_g: v.mean_g, mean_f: v.mean_f, rs_residual }, "out")
    })
}

/// Closed-form `<G>` of the annihilation eigenstate with `|z| = zmod`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_gk_mean_g(params: *const PtParams, zmod: f64, out: *mut f64) -> PtStatus {
    call(|| {
        let p = borrow(params, "params")?;
        put(out, gk_mean_g(&p.0, zmod)?, "out")
    })
}

#[no_mangle]
pub extern "C" fn pt_check_count() -> usize {
    NAMES.len()
}

/// Static name of check `i`, or null when out of range.
#[no_mangle]
pub extern "C" fn pt_check_name(i: usize) -> *const c_char {
    NAMES.get(i).map_or(ptr::null(), |c| c.as_ptr())
}

#[no_mangle]
pub extern "C" fn pt_suite_config_default() -> PtSuiteConfig {
    let d = SuiteConfig::default();
    PtSuiteConfig { dim: d.dim, radial_nodes: d.radial_nodes, angular_nodes: d.angular_nodes, grid_nodes: d.grid_nodes }
}

/// Runs check `name`. `config` may be null for the defaults.
///
/// # Safety
/// `params` must be a live handle, `name` a nul-terminated string, `config`
/// null or valid, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_verify_run(params: *const PtParams, name: *const c_char, config: *const PtSuiteConfig, out: *mut *mut PtReport) -> PtStatus {
    call(|| {
        let p = borrow(params, "params")?;
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| Failure(PtStatus::InvalidString, "check name is not UTF-8".into()))?;
        let cfg = match config.as_ref() {
            Some(c) => SuiteConfig { dim: c.dim, radial_nodes: c.radial_nodes, angular_nodes: c.angular_nodes, grid_nodes: c.grid_nodes },
            None => SuiteConfig::default(),
        };
        let report = run_check(name, &p.0, &cfg)?;
        let keys = report.details.keys().map(|k| CString::new(k.as_str()).unwrap_or_default()).collect();
        let name = CString::new(report.check_name.as_str()).unwrap_or_default();
        out.write(boxed(PtReport { report, name, keys }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_free(report: *mut PtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Check name, owned by the report.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_name(report: *const PtReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.name.as_ptr())
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_passed(report: *const PtReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.passed)
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_max_deviation(report: *const PtReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.max_deviation)
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_tolerance(report: *const PtReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.tolerance)
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn pt_report_detail_count(report: *const PtReport) -> usize {
    report.as_ref().map_or(0, |r| r.keys.len())
}

/// Detail `i` in key order. `key` receives a string owned by the report.
///
/// # Safety
/// `report` must be a live handle; `key` and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_report_detail(report: *const PtReport, i: usize, key: *mut *const c_char, value: *mut f64) -> PtStatus {
    call(|| {
        let r = borrow(report, "report")?;
        let k = r.keys.get(i).ok_or_else(|| Failure(PtStatus::Domain, format!("detail index {i} out of range ({} details)", r.keys.len())))?;
        let v = r.report.details[k.to_str().unwrap_or_default()];
        put(key, k.as_ptr(), "key")?;
        put(value, v, "value")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_library() {
        let ours: Vec<&str> = NAMES.iter().map(|c| c.to_str().unwrap()).collect();
        assert_eq!(ours, pt_cs::verify::CHECK_NAMES.to_vec());
    }
}
