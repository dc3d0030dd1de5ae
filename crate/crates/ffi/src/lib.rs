//! C ABI for the critical-threshold library: opaque handles, plain structs,
//! and integer status codes. Every entry point catches panics and reports
//! them as a panic status; the last error message is kept per thread and can
//! be copied out with `ct_last_error`.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ct_core::background::BackgroundSpec;
use ct_core::params::{CaseTag, ForceSign, Params, PhasePoint, VerdictLabel};
use ct_core::phaseplane::{simulate_ws, SimOptions};
use ct_core::thresholds::{closing_condition, RepulsiveClassifier};

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    CtStatusOk = 0,
    CtStatusInvalidArgument = 1,
    CtStatusNumericalFailure = 2,
    CtStatusNullPointer = 3,
    CtStatusOutOfRange = 4,
    CtStatusPanic = 5,
}

fn status_of(err: &ct_core::CtError) -> CtStatus {
    use ct_core::CtError::*;
    match err {
        InvalidParams(_) | InvalidInput(_) | MismatchedGrids(_) | Config(_) => {
            CtStatus::CtStatusInvalidArgument
        }
        OutOfRange { .. } | OutOfDomain { .. } | BackgroundOutOfRange { .. } => {
            CtStatus::CtStatusOutOfRange
        }
        _ => CtStatus::CtStatusNumericalFailure,
    }
}

/// System parameters; `k` must be -1 (attractive) or +1 (repulsive).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtParams {
    pub nu: f64,
    pub k: i32,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl CtParams {
    fn to_params(self) -> ct_core::Result<Params> {
        let k = ForceSign::from_int(self.k as i64)?;
        Params::new(self.nu, k, self.c_minus, self.c_plus)
    }
}

/// Verdict labels: 0 subcritical, 1 supercritical, 2 indeterminate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtVerdictLabel {
    CtVerdictSubcritical = 0,
    CtVerdictSupercritical = 1,
    CtVerdictIndeterminate = 2,
}

/// Regularity cases: 0 rep-#1, 1 rep-#2.1, 2 rep-#2.2, 3 attractive-borderline,
/// 4 none.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtCaseTag {
    CtCaseRep1 = 0,
    CtCaseRep21 = 1,
    CtCaseRep22 = 2,
    CtCaseAttractiveBorderline = 3,
    CtCaseNone = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtVerdict {
    pub label: CtVerdictLabel,
    pub margin: f64,
    pub case_tag: CtCaseTag,
}

fn convert_case(tag: CaseTag) -> CtCaseTag {
    match tag {
        CaseTag::Rep1 => CtCaseTag::CtCaseRep1,
        CaseTag::Rep21 => CtCaseTag::CtCaseRep21,
        CaseTag::Rep22 => CtCaseTag::CtCaseRep22,
        CaseTag::AttractiveBorderline => CtCaseTag::CtCaseAttractiveBorderline,
        CaseTag::None => CtCaseTag::CtCaseNone,
    }
}

fn convert_verdict(v: ct_core::params::Verdict) -> CtVerdict {
    CtVerdict {
        label: match v.label {
            VerdictLabel::Subcritical => CtVerdictLabel::CtVerdictSubcritical,
            VerdictLabel::Supercritical => CtVerdictLabel::CtVerdictSupercritical,
            VerdictLabel::Indeterminate => CtVerdictLabel::CtVerdictIndeterminate,
        },
        margin: v.margin,
        case_tag: convert_case(v.case_tag),
    }
}

/// Closing-condition report; `s_plus` and `s_star_star` are NaN when the
/// corresponding quantity is not defined in the current regime.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtClosing {
    pub holds: i32,
    pub case_tag: CtCaseTag,
    pub s_plus: f64,
    pub s_star_star: f64,
    pub sign_test: i32,
}

/// Result of a reduced-system simulation; `t_star` and `w_star` are NaN when
/// no blow-up occurred before the horizon.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CtSimOutcome {
    pub blew_up: i32,
    pub t_star: f64,
    pub w_star: f64,
}

/// Opaque pre-built classifier for one repulsive parameter set.
pub struct CtClassifier(RepulsiveClassifier);

/// Opaque background profile.
pub struct CtBackground(BackgroundSpec);

fn guarded<F: FnOnce() -> CtStatus>(f: F) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic crossed the FFI boundary");
            CtStatus::CtStatusPanic
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message on this thread into `buf` (truncated to
/// `len - 1` bytes, always NUL-terminated). Returns the full message length.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be NULL (then only
/// the length is returned).
#[no_mangle]
pub unsafe extern "C" fn ct_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Validates a parameter set without allocating anything.
#[no_mangle]
pub extern "C" fn ct_params_validate(params: CtParams) -> CtStatus {
    guarded(|| match params.to_params() {
        Ok(_) => CtStatus::CtStatusOk,
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Builds the threshold constructions for a repulsive parameter set.
/// Curves with unbounded domains are tabulated up to `s_max`.
///
/// # Safety
/// `out` must be a valid pointer; the handle must be released with
/// `ct_classifier_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_classifier_new(
    params: CtParams,
    s_max: f64,
    out: *mut *mut CtClassifier,
) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CtStatus::CtStatusNullPointer;
        }
        match params
            .to_params()
            .and_then(|p| RepulsiveClassifier::new(p, s_max))
        {
            Ok(cls) => {
                *out = Box::into_raw(Box::new(CtClassifier(cls)));
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `handle` must come from `ct_classifier_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ct_classifier_free(handle: *mut CtClassifier) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Classifies the phase point `(w, s)` with the indeterminate-band width
/// `tol`.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ct_classifier_classify(
    handle: *const CtClassifier,
    w: f64,
    s: f64,
    tol: f64,
    out: *mut CtVerdict,
) -> CtStatus {
    guarded(|| {
        let (Some(cls), false) = (handle.as_ref(), out.is_null()) else {
            set_error("NULL handle or out pointer");
            return CtStatus::CtStatusNullPointer;
        };
        match cls.0.classify(PhasePoint::new(w, s), tol) {
            Ok(v) => {
                *out = convert_verdict(v);
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Breakdown-time bound for a supercritical point; `*out` is NaN when the
/// point is not supercritical.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ct_classifier_breakdown_bound(
    handle: *const CtClassifier,
    w: f64,
    s: f64,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(cls), false) = (handle.as_ref(), out.is_null()) else {
            set_error("NULL handle or out pointer");
            return CtStatus::CtStatusNullPointer;
        };
        match cls.0.breakdown_time_bound(PhasePoint::new(w, s)) {
            Ok(bound) => {
                *out = bound.unwrap_or(f64::NAN);
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Evaluates the closing condition for a parameter set.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_closing_condition(params: CtParams, out: *mut CtClosing) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CtStatus::CtStatusNullPointer;
        }
        match params.to_params() {
            Ok(p) => {
                let r = closing_condition(&p);
                *out = CtClosing {
                    holds: r.holds as i32,
                    case_tag: convert_case(r.case_tag),
                    s_plus: r.s_plus.unwrap_or(f64::NAN),
                    s_star_star: r.s_star_star.unwrap_or(f64::NAN),
                    sign_test: r.sign_test as i32,
                };
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Classifies a phase point for the attractive system (`params.k` must be -1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_attractive_classify(
    params: CtParams,
    w: f64,
    s: f64,
    tol: f64,
    out: *mut CtVerdict,
) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CtStatus::CtStatusNullPointer;
        }
        let result = params.to_params().and_then(|p| {
            ct_core::attractive::classify_attractive(PhasePoint::new(w, s), &p, tol)
        });
        match result {
            Ok(v) => {
                *out = convert_verdict(v);
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Constant background profile.
///
/// # Safety
/// `out` must be a valid pointer; free the handle with `ct_background_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_background_constant(
    value: f64,
    out: *mut *mut CtBackground,
) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CtStatus::CtStatusNullPointer;
        }
        let bg = BackgroundSpec::constant(value);
        match bg.validate() {
            Ok(()) => {
                *out = Box::into_raw(Box::new(CtBackground(bg)));
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Sinusoidal background `mean + amplitude sin(omega t + phase)`.
///
/// # Safety
/// `out` must be a valid pointer; free the handle with `ct_background_free`.
#[no_mangle]
pub unsafe extern "C" fn ct_background_sinusoid(
    mean: f64,
    amplitude: f64,
    omega: f64,
    phase: f64,
    out: *mut *mut CtBackground,
) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CtStatus::CtStatusNullPointer;
        }
        let bg = BackgroundSpec::sinusoid(mean, amplitude, omega, phase);
        match bg.validate() {
            Ok(()) => {
                *out = Box::into_raw(Box::new(CtBackground(bg)));
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `handle` must come from a `ct_background_*` constructor and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn ct_background_free(handle: *mut CtBackground) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Evaluates the background profile at time `t`.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ct_background_eval(
    handle: *const CtBackground,
    t: f64,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(bg), false) = (handle.as_ref(), out.is_null()) else {
            set_error("NULL handle or out pointer");
            return CtStatus::CtStatusNullPointer;
        };
        match bg.0.eval(t) {
            Ok(v) => {
                *out = v;
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Integrates the reduced system from `(w0, s0)` to `horizon` with blow-up
/// detection, using the given integrator tolerances (pass 0 for defaults).
///
/// # Safety
/// `bg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ct_simulate_ws(
    params: CtParams,
    bg: *const CtBackground,
    w0: f64,
    s0: f64,
    horizon: f64,
    rel_tol: f64,
    abs_tol: f64,
    out: *mut CtSimOutcome,
) -> CtStatus {
    guarded(|| {
        let (Some(bg), false) = (bg.as_ref(), out.is_null()) else {
            set_error("NULL background or out pointer");
            return CtStatus::CtStatusNullPointer;
        };
        let mut opts = SimOptions::default();
        if rel_tol > 0.0 {
            opts.integrator.rel_tol = rel_tol;
        }
        if abs_tol > 0.0 {
            opts.integrator.abs_tol = abs_tol;
        }
        let result = params
            .to_params()
            .and_then(|p| simulate_ws(PhasePoint::new(w0, s0), &p, &bg.0, horizon, &opts));
        match result {
            Ok(outcome) => {
                *out = match outcome.blowup {
                    Some(b) => CtSimOutcome {
                        blew_up: 1,
                        t_star: b.t,
                        w_star: b.w,
                    },
                    None => CtSimOutcome {
                        blew_up: 0,
                        t_star: f64::NAN,
                        w_star: f64::NAN,
                    },
                };
                CtStatus::CtStatusOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}
