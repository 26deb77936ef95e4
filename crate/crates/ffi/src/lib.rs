//! C ABI for the designforge library.
//!
//! Conventions:
//! - Protocol parameters live behind the opaque handle [`DfParams`];
//!   constructors return null on invalid input.
//! - Every fallible call returns a [`DfStatus`]; on failure the message is
//!   retrievable with [`df_last_error`] (thread-local).
//! - Strings returned as `char*` are owned by the caller and must be
//!   released with [`df_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use designforge::angle::{self, Party, ProtocolParams};
use designforge::{convert, oracle, treeplan, Error};

/// Status codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    /// Invalid argument (null pointer, bad UTF-8, domain error).
    InvalidArgument = 1,
    /// A mathematical precondition of the requested quantity fails.
    Precondition = 2,
    /// Input exceeds a hard size cap.
    Capacity = 3,
    /// A numerical procedure failed to converge.
    Numeric = 4,
    /// Internal consistency violation (library bug).
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(CString::new(msg).unwrap_or_else(|_| CString::new("error").unwrap()))
    });
}

fn status_of(err: &Error) -> DfStatus {
    match err {
        Error::Domain(_) => DfStatus::InvalidArgument,
        Error::Capacity(_) => DfStatus::Capacity,
        Error::Numeric(_) => DfStatus::Numeric,
        Error::Inconsistency(_) => DfStatus::Internal,
    }
}

fn fail(err: Error) -> DfStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Last error message of the current thread, or null when no error has
/// occurred. The pointer stays valid until the next failing call on this
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn df_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn df_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `df_*` function that
/// documents caller ownership, or null.
#[no_mangle]
pub unsafe extern "C" fn df_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque protocol-parameter handle.
pub struct DfParams {
    inner: ProtocolParams,
}

fn boxed(params: designforge::Result<ProtocolParams>) -> *mut DfParams {
    match params {
        Ok(inner) => Box::into_raw(Box::new(DfParams { inner })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Swap-protocol parameters (two parties of m qudits, ℓ exchanged).
/// Returns null on invalid input.
#[no_mangle]
pub extern "C" fn df_params_swap(q: u64, k: usize, m: u64, ell: u64) -> *mut DfParams {
    boxed(ProtocolParams::swap(q, k, m, ell))
}

/// Bipartite crosstwirl parameters. Returns null on invalid input.
#[no_mangle]
pub extern "C" fn df_params_crosstwirl(q: u64, k: usize, m: u64, ell: u64) -> *mut DfParams {
    boxed(ProtocolParams::crosstwirl(q, k, m, ell))
}

/// Multipartite crosstwirl parameters from parallel arrays of per-party
/// block widths and crosstwirl widths. Returns null on invalid input.
///
/// # Safety
/// `ms` and `ells` must point to `n_parties` readable u64 values.
#[no_mangle]
pub unsafe extern "C" fn df_params_multi(
    q: u64,
    k: usize,
    ms: *const u64,
    ells: *const u64,
    n_parties: usize,
) -> *mut DfParams {
    if ms.is_null() || ells.is_null() || n_parties == 0 {
        set_error("null party arrays".into());
        return std::ptr::null_mut();
    }
    let ms = std::slice::from_raw_parts(ms, n_parties);
    let ells = std::slice::from_raw_parts(ells, n_parties);
    let parties: Vec<Party> =
        ms.iter().zip(ells).map(|(&m, &ell)| Party { m, ell }).collect();
    boxed(ProtocolParams::multi(q, k, parties))
}

/// Releases a parameter handle.
///
/// # Safety
/// `p` must come from a `df_params_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn df_params_free(p: *mut DfParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn params_ref<'a>(p: *const DfParams) -> Option<&'a ProtocolParams> {
    (!p.is_null()).then(|| &(*p).inner)
}

/// Analytic angle bound for the handle's protocol. Writes the linear value
/// (possibly +inf) and its natural log.
///
/// # Safety
/// `p` must be a valid handle; `out_value` and `out_ln` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_analytic_bound(
    p: *const DfParams,
    out_value: *mut f64,
    out_ln: *mut f64,
) -> DfStatus {
    let Some(params) = params_ref(p) else {
        set_error("null params handle".into());
        return DfStatus::InvalidArgument;
    };
    match angle::analytic_bound(params) {
        Ok(b) => {
            if !out_value.is_null() {
                *out_value = b.value();
            }
            if !out_ln.is_null() {
                *out_ln = b.ln();
            }
            if angle::all_ok(&params.preconditions()) {
                DfStatus::Ok
            } else {
                set_error("one or more proposition preconditions fail; bound may be vacuous".into());
                DfStatus::Precondition
            }
        }
        Err(e) => fail(e),
    }
}

/// Exact subspace angle via the generalized eigenproblem.
///
/// # Safety
/// `p` must be a valid handle; `out_angle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_exact_angle(p: *const DfParams, out_angle: *mut f64) -> DfStatus {
    let Some(params) = params_ref(p) else {
        set_error("null params handle".into());
        return DfStatus::InvalidArgument;
    };
    match angle::exact_angle(params) {
        Ok(rep) => {
            if let (Some(a), false) = (rep.exact_angle, out_angle.is_null()) {
                *out_angle = a;
            }
            DfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Full angle report (params, angle, bound, constants, flags) as a JSON
/// string. Caller frees with [`df_string_free`]; returns null on error.
///
/// # Safety
/// `p` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn df_angle_report_json(p: *const DfParams) -> *mut c_char {
    let Some(params) = params_ref(p) else {
        set_error("null params handle".into());
        return std::ptr::null_mut();
    };
    match angle::exact_angle(params) {
        Ok(rep) => to_owned_cstring(serde_json::to_string_pretty(&rep).unwrap_or_default()),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// TPE bound 5K·sqrt(Σ_p q^(-2ℓ_p)) for crosstwirl parameter handles.
/// Status is Precondition when the implemented corollary preconditions
/// fail (the value is still written).
///
/// # Safety
/// `p` must be a valid handle; out pointers must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn df_tpe_bound(
    p: *const DfParams,
    out_value: *mut f64,
    out_ln: *mut f64,
) -> DfStatus {
    let Some(params) = params_ref(p) else {
        set_error("null params handle".into());
        return DfStatus::InvalidArgument;
    };
    match angle::tpe_bound_multict(params) {
        Ok(rep) => {
            if !out_value.is_null() {
                *out_value = rep.bound.value();
            }
            if !out_ln.is_null() {
                *out_ln = rep.bound.ln();
            }
            let implemented_ok = rep.preconditions[0].ok && rep.preconditions[3].ok;
            if implemented_ok {
                DfStatus::Ok
            } else {
                set_error("corollary preconditions fail".into());
                DfStatus::Precondition
            }
        }
        Err(e) => fail(e),
    }
}

/// Smallest ℓ meeting the swap design theorem at error `eps`.
///
/// # Safety
/// Out pointers must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn df_swap_design_ell(
    k: u64,
    q: u64,
    m: u64,
    eps: f64,
    out_ell: *mut u64,
    out_feasible: *mut bool,
) -> DfStatus {
    match convert::swap_design_ell(k, q, m, eps) {
        Ok(res) => {
            if !out_ell.is_null() {
                *out_ell = res.ell;
            }
            if !out_feasible.is_null() {
                *out_feasible = res.feasible;
            }
            if res.feasible {
                DfStatus::Ok
            } else {
                set_error("required ell exceeds m/2".into());
                DfStatus::Precondition
            }
        }
        Err(e) => fail(e),
    }
}

/// Relative-error ε of the crosstwirl design theorem from parallel
/// per-party arrays.
///
/// # Safety
/// `ms`/`ells` must point to `n_parties` u64 values; out pointers writable
/// or null.
#[no_mangle]
pub unsafe extern "C" fn df_crosstwirl_design_eps(
    q: u64,
    k: u64,
    ms: *const u64,
    ells: *const u64,
    n_parties: usize,
    out_value: *mut f64,
    out_ln: *mut f64,
) -> DfStatus {
    if ms.is_null() || ells.is_null() || n_parties == 0 {
        set_error("null party arrays".into());
        return DfStatus::InvalidArgument;
    }
    let ms = std::slice::from_raw_parts(ms, n_parties);
    let ells = std::slice::from_raw_parts(ells, n_parties);
    let pairs: Vec<(u64, u64)> = ms.iter().zip(ells).map(|(&m, &l)| (m, l)).collect();
    match convert::crosstwirl_design_eps(q, k, &pairs) {
        Ok(res) => {
            if !out_value.is_null() {
                *out_value = res.eps.value();
            }
            if !out_ln.is_null() {
                *out_ln = res.eps.ln();
            }
            if res.preconditions.iter().all(|f| f.ok) {
                DfStatus::Ok
            } else {
                set_error("theorem preconditions fail".into());
                DfStatus::Precondition
            }
        }
        Err(e) => fail(e),
    }
}

/// Multiplicative composition of relative errors:
/// (1+base)·Π(1+eps_i) - 1.
///
/// # Safety
/// `eps` must point to `n` f64 values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn df_compose_errors(
    eps: *const f64,
    n: usize,
    base: f64,
    out: *mut f64,
) -> DfStatus {
    if (eps.is_null() && n > 0) || out.is_null() {
        set_error("null argument".into());
        return DfStatus::InvalidArgument;
    }
    let list = if n == 0 { &[][..] } else { std::slice::from_raw_parts(eps, n) };
    match convert::compose_errors(list, base) {
        Ok(v) => {
            *out = v;
            DfStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Plans a D-ary lattice crosstwirl and returns the full plan as JSON.
/// Caller frees with [`df_string_free`]; returns null on error.
#[no_mangle]
pub extern "C" fn df_plan_json(m_total: u64, d_dim: usize, k: u64, q: u64, eps: f64) -> *mut c_char {
    match treeplan::plan_lattice(m_total, d_dim, k, q, eps, None) {
        Ok(plan) => to_owned_cstring(serde_json::to_string_pretty(&plan).unwrap_or_default()),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Runs the oracle cross-validation grid ("tiny" or "full") and returns
/// the pass/fail ledger as JSON. Caller frees with [`df_string_free`];
/// returns null on error.
///
/// # Safety
/// `grid` must be a valid NUL-terminated string or null (defaults to
/// "tiny").
#[no_mangle]
pub unsafe extern "C" fn df_verify_json(grid: *const c_char, seed: u64) -> *mut c_char {
    let grid = if grid.is_null() {
        "tiny"
    } else {
        match CStr::from_ptr(grid).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("grid is not valid UTF-8".into());
                return std::ptr::null_mut();
            }
        }
    };
    match oracle::verify::run_grid(grid, seed) {
        Ok(ledger) => to_owned_cstring(serde_json::to_string_pretty(&ledger).unwrap_or_default()),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

fn to_owned_cstring(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => {
            set_error("interior NUL in output".into());
            std::ptr::null_mut()
        }
    }
}
