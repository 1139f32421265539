//! C ABI over `ccsp`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CcspStatus`]; the message of the most recent failure on the calling
//! thread is available from [`ccsp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccsp::instance::load_edge_list;
use ccsp::landscape::{separation_prob, EdgeConfig};
use ccsp::lasserre::build_relaxation;
use ccsp::rounding::{pipeline_from_solution, threshold, PipelineConfig};
use ccsp::sdp_solver::{solve, SolverConfig};
use ccsp::{CspInstance, Error, MomentSolution};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Capacity = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque problem instance.
pub struct CcspInstance {
    inner: CspInstance,
}

/// Opaque moment solution.
pub struct CcspSolution {
    inner: MomentSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CcspStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::Config(_) => CcspStatus::Parse,
        Error::Capacity { .. } => CcspStatus::Capacity,
        Error::Numerical(_) | Error::InconsistentSolution(_) | Error::NullEvent { .. } => CcspStatus::Numerical,
        Error::Io(_) => CcspStatus::Io,
        Error::InvalidInstance(_) | Error::InvalidArgument(_) => CcspStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CcspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcspStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CcspStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CcspStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn buffer<'a, T>(p: *mut T, len: usize, need: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len < need {
        return Err(Fail::Lib(Error::InvalidArgument(format!(
            "{what} holds {len} entries, {need} required"
        ))));
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ccsp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an instance in edge-list text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsp_instance_from_edge_list(text: *const c_char, out: *mut *mut CcspInstance) -> CcspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = load_edge_list(c_str(text, "text")?)?;
        *out = Box::into_raw(Box::new(CcspInstance { inner }));
        Ok(())
    })
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// As for [`ccsp_instance_from_edge_list`].
#[no_mangle]
pub unsafe extern "C" fn ccsp_instance_from_json(json: *const c_char, out: *mut *mut CcspInstance) -> CcspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = CspInstance::from_json(c_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(CcspInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `inst` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccsp_instance_free(inst: *mut CcspInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of variables, 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccsp_instance_num_variables(inst: *const CcspInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n)
}

/// Normalized objective of a labelling (`labels[i]` in `{0, 1}`).
///
/// # Safety
/// `labels` must point to `len` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_instance_evaluate(
    inst: *const CcspInstance,
    labels: *const u8,
    len: usize,
    out: *mut f64,
) -> CcspStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_ptr(out, "out")?;
        if labels.is_null() {
            return Err(Fail::Null("labels"));
        }
        let labels = std::slice::from_raw_parts(labels, len);
        *out = inst.inner.evaluate(labels)?;
        Ok(())
    })
}

/// Builds and solves the level-`level` relaxation. `max_iterations == 0` and
/// `tolerance <= 0` select the defaults.
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_solve(
    inst: *const CcspInstance,
    level: usize,
    max_iterations: usize,
    tolerance: f64,
    out: *mut *mut CcspSolution,
) -> CcspStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_ptr(out, "out")?;
        let mut cfg = SolverConfig::default();
        if max_iterations > 0 {
            cfg.max_iterations = max_iterations;
        }
        if tolerance > 0.0 {
            cfg.primal_tolerance = tolerance;
            cfg.dual_tolerance = tolerance;
        }
        let rel = build_relaxation(&inst.inner, level)?;
        let (inner, _) = solve(&rel, &cfg)?;
        *out = Box::into_raw(Box::new(CcspSolution { inner }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_solution_objective(sol: *const CcspSolution, out: *mut f64) -> CcspStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(sol, "sol")?.inner.objective_value;
        Ok(())
    })
}

/// Serializes a solution; release the string with [`ccsp_string_free`].
///
/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_solution_to_json(sol: *const CcspSolution, out: *mut *mut c_char) -> CcspStatus {
    guard(|| {
        let sol = deref(sol, "sol")?;
        let out = out_ptr(out, "out")?;
        let json = sol.inner.to_json()?;
        *out = CString::new(json)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Parses a solution produced by [`ccsp_solution_to_json`].
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_solution_from_json(json: *const c_char, out: *mut *mut CcspSolution) -> CcspStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner = MomentSolution::from_json(c_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(CcspSolution { inner }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccsp_solution_free(sol: *mut CcspSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ccsp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decorrelates, rounds `trials` times from `seed` and repairs the balance
/// of the best trial. Writes spins (`+1`/`-1`) into `spins[0..n]`.
///
/// # Safety
/// Handles must be live, `spins` must hold `len >= n` bytes, and
/// `value`/`balance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_round(
    inst: *const CcspInstance,
    sol: *const CcspSolution,
    trials: usize,
    seed: u64,
    spins: *mut i8,
    len: usize,
    value: *mut f64,
    balance: *mut f64,
) -> CcspStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let sol = deref(sol, "sol")?;
        let value = out_ptr(value, "value")?;
        let balance = out_ptr(balance, "balance")?;
        let spins = buffer(spins, len, inst.inner.n, "spins")?;
        let cfg = PipelineConfig {
            trials,
            seed,
            ..PipelineConfig::default()
        };
        let res = pipeline_from_solution(&inst.inner, &sol.inner, &cfg)?;
        spins.copy_from_slice(&res.best.labels);
        *value = res.best.value;
        *balance = res.best.balance;
        Ok(())
    })
}

/// Exact optimum by enumeration; `witness[0..n]` receives an optimal
/// labelling.
///
/// # Safety
/// `inst` must be live, `witness` must hold `len >= n` bytes and `value`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsp_brute_force(
    inst: *const CcspInstance,
    respect_cardinality: bool,
    witness: *mut u8,
    len: usize,
    value: *mut f64,
) -> CcspStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let value = out_ptr(value, "value")?;
        let witness = buffer(witness, len, inst.inner.n, "witness")?;
        let res = ccsp::oracle::brute_force(&inst.inner, respect_cardinality)?;
        witness.copy_from_slice(&res.witness);
        *value = res.optimum;
        Ok(())
    })
}

/// `P(X <= t1, Y <= t2)` for standard normals with correlation `rho`.
#[no_mangle]
pub extern "C" fn ccsp_bvn_cdf(t1: f64, t2: f64, rho: f64) -> f64 {
    ccsp::normal::bvn_cdf(t1, t2, rho)
}

/// Probability that threshold rounding separates an edge with biases
/// `mu1`, `mu2` and vector correlation `rho`; NaN for invalid input.
#[no_mangle]
pub extern "C" fn ccsp_separation_prob(mu1: f64, mu2: f64, rho: f64) -> f64 {
    let cfg = EdgeConfig { mu1, mu2, rho };
    if ![mu1, mu2, rho].iter().all(|v| v.is_finite() && v.abs() <= 1.0) {
        return f64::NAN;
    }
    separation_prob(&cfg)
}

/// Rounding threshold for bias `mu`: `P(g <= t) = (1 + mu) / 2`.
#[no_mangle]
pub extern "C" fn ccsp_threshold(mu: f64) -> f64 {
    if !(mu.is_finite() && mu.abs() <= 1.0) {
        return f64::NAN;
    }
    threshold(mu)
}
