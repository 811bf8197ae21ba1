//! C ABI over `haarlm`. Every call returns an [`HlmStatus`]; results go through
//! out-pointers. Handles are opaque and released with their `_free` function.
//! The message of the last failure on the calling thread is kept for
//! [`hlm_last_error`].

use haarlm::experiments::diagonal::diagonal_point;
use haarlm::experiments::offdiag::run_offdiagonal;
use haarlm::experiments::{ExperimentConfig, RunMode};
use haarlm::kernels::{eta_translate, KernelSet};
use haarlm::norms::SpaceParams;
use haarlm::projection::haar_coefficients;
use haarlm::Error;
use num_traits::ToPrimitive;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlmStatus {
    Ok = 0,
    NullPointer = 1,
    Cardinality = 2,
    Separation = 3,
    Domain = 4,
    Tolerance = 5,
    Support = 6,
    Degenerate = 7,
    Admissibility = 8,
    Calibration = 9,
    Mode = 10,
    Tail = 11,
    Regime = 12,
    Cost = 13,
    Fit = 14,
    Parse = 15,
    AssertFail = 16,
    Io = 17,
    Panic = 18,
}

/// Run mode for block norms.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlmMode {
    Direct = 0,
    Periodic = 1,
    Both = 2,
}

/// Calibrated kernels.
pub struct HlmKernels(KernelSet);

/// Experiment configuration.
pub struct HlmConfig(ExperimentConfig);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn status_of(e: &Error) -> HlmStatus {
    match e {
        Error::Cardinality(_) => HlmStatus::Cardinality,
        Error::Separation(_) => HlmStatus::Separation,
        Error::Domain(_) => HlmStatus::Domain,
        Error::Tolerance(_) => HlmStatus::Tolerance,
        Error::Support(_) => HlmStatus::Support,
        Error::Degenerate(_) => HlmStatus::Degenerate,
        Error::Admissibility(_) => HlmStatus::Admissibility,
        Error::Calibration(_) => HlmStatus::Calibration,
        Error::Mode(_) => HlmStatus::Mode,
        Error::Tail(_) => HlmStatus::Tail,
        Error::Regime(_) => HlmStatus::Regime,
        Error::Cost(_) => HlmStatus::Cost,
        Error::Fit(_) => HlmStatus::Fit,
        Error::Parse(_) => HlmStatus::Parse,
        Error::AssertFail(_) => HlmStatus::AssertFail,
        Error::Io(_) => HlmStatus::Io,
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), HlmStatus>) -> HlmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside haarlm".into());
            HlmStatus::Panic
        }
    }
}

fn lift<T>(r: haarlm::Result<T>) -> Result<T, HlmStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn non_null<T>(p: *const T) -> Result<(), HlmStatus> {
    if p.is_null() {
        set_error("null pointer argument".into());
        Err(HlmStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hlm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds the default kernel set (shared, built once per process).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hlm_kernels_default(out: *mut *mut HlmKernels) -> HlmStatus {
    guard(|| {
        non_null(out)?;
        *out = Box::into_raw(Box::new(HlmKernels(KernelSet::default_set().clone())));
        Ok(())
    })
}

/// Reads a kernel file written by `haarlm kernels build`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hlm_kernels_load(path: *const c_char, out: *mut *mut HlmKernels) -> HlmStatus {
    guard(|| {
        non_null(path)?;
        non_null(out)?;
        let p = CStr::from_ptr(path).to_str().map_err(|_| {
            set_error("path is not UTF-8".into());
            HlmStatus::Parse
        })?;
        let text = lift(std::fs::read_to_string(p).map_err(Error::from))?;
        let set = lift(KernelSet::from_text(&text))?;
        *out = Box::into_raw(Box::new(HlmKernels(set)));
        Ok(())
    })
}

/// `c_0` and the calibration interval `[left, right]`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_kernels_calibration(k: *const HlmKernels, c0: *mut f64, left: *mut f64, right: *mut f64) -> HlmStatus {
    guard(|| {
        non_null(k)?;
        non_null(c0)?;
        non_null(left)?;
        non_null(right)?;
        let k = &(*k).0;
        *c0 = k.c0;
        *left = k.j.left.to_f64();
        *right = k.j.right.to_f64();
        Ok(())
    })
}

/// # Safety
/// `k` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hlm_kernels_free(k: *mut HlmKernels) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// `<eta_{l,nu}, h_{j,mu}>` as a double; exact in the library.
///
/// # Safety
/// `k` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_haar_coefficient(k: *const HlmKernels, j: i64, mu: i64, l: i64, nu: i64, out: *mut f64) -> HlmStatus {
    guard(|| {
        non_null(k)?;
        non_null(out)?;
        if !(0..=40).contains(&j) || !(0..=40).contains(&l) {
            set_error(format!("levels out of range: j={j} l={l}"));
            return Err(HlmStatus::Domain);
        }
        let c = haar_coefficients(&eta_translate(&(*k).0.eta, l, nu), j).get(mu);
        *out = c.to_f64().unwrap_or(f64::NAN);
        Ok(())
    })
}

/// New configuration with `(p, q, s)`, separation `R`, periodic mode.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_config_new(p: f64, q: f64, s: f64, r: i64, out: *mut *mut HlmConfig) -> HlmStatus {
    guard(|| {
        non_null(out)?;
        let cfg = ExperimentConfig::new(SpaceParams::new(p, q, s), Vec::new(), r);
        lift(cfg.params.check())?;
        *out = Box::into_raw(Box::new(HlmConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_config_set_mode(cfg: *mut HlmConfig, mode: HlmMode) -> HlmStatus {
    guard(|| {
        non_null(cfg)?;
        (*cfg).0.mode = match mode {
            HlmMode::Direct => RunMode::Direct,
            HlmMode::Periodic => RunMode::Periodic,
            HlmMode::Both => RunMode::Both,
        };
        Ok(())
    })
}

/// Exact window `|m|, |n| <= window` for the off-diagonal sums; negative restores the default.
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_config_set_window(cfg: *mut HlmConfig, window: i64) -> HlmStatus {
    guard(|| {
        non_null(cfg)?;
        (*cfg).0.window = (window >= 0).then_some(window);
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hlm_config_free(cfg: *mut HlmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// `D(N)` and its lower bound.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_diagonal(cfg: *const HlmConfig, k: *const HlmKernels, n: i64, d: *mut f64, lower: *mut f64) -> HlmStatus {
    guard(|| {
        non_null(cfg)?;
        non_null(k)?;
        non_null(d)?;
        non_null(lower)?;
        let c = &(*cfg).0;
        lift(c.validate())?;
        let p = lift(diagonal_point(c, &(*k).0, n))?;
        *d = p.d;
        *lower = p.lower_bound;
        Ok(())
    })
}

/// `U(N)`, `D(N)` and the exact window sum.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hlm_offdiagonal(cfg: *const HlmConfig, k: *const HlmKernels, n: i64, u: *mut f64, d: *mut f64, window_sum: *mut f64) -> HlmStatus {
    guard(|| {
        non_null(cfg)?;
        non_null(k)?;
        non_null(u)?;
        non_null(d)?;
        non_null(window_sum)?;
        let r = lift(run_offdiagonal(&(*cfg).0, &(*k).0, n))?;
        *u = r.u;
        *d = r.d;
        *window_sum = r.window_sum;
        Ok(())
    })
}
