//! C ABI over `hyuntil`.
//!
//! Scenarios and simulated arc sets are opaque handles owned by the caller
//! and released with the matching `*_free` function. Every fallible call
//! returns an [`HyStatus`]; on failure [`hy_last_error`] describes the error
//! on the calling thread. Reports come back as JSON strings that must be
//! released with [`hy_string_free`].
//!
//! `settings_toml` arguments may be NULL for defaults, or hold the same
//! TOML keys as the CLI's `--print-config` output.

use hyuntil::arc::HybridArc;
use hyuntil::cert::EciVariant;
use hyuntil::monitor::{UntilMode, Verdict};
use hyuntil::run::{self, Settings, Theorem};
use hyuntil::scenarios::{self, Scenario};
use hyuntil::sim::simulate;
use hyuntil::{config, report, Error};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Dimension = 3,
    /// The initial state is outside cl(C) u D.
    InitialState = 4,
    Invalid = 5,
    Parse = 6,
    Config = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Three-valued monitor verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyVerdict {
    Satisfied = 0,
    Violated = 1,
    Unknown = 2,
}

/// Opaque scenario: a hybrid system with its propositions and certificates.
pub struct HyScenario(Scenario);

/// Opaque set of arcs from one simulation.
pub struct HyArcs(Vec<HybridArc>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HyStatus {
    match e {
        Error::Dimension { .. } => HyStatus::Dimension,
        Error::InitialState(_) => HyStatus::InitialState,
        Error::Invalid(_) => HyStatus::Invalid,
        Error::Parse { .. } => HyStatus::Parse,
        Error::Config(_) => HyStatus::Config,
        Error::Io(_) => HyStatus::Io,
    }
}

struct Fail(HyStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HyStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, records any error or panic, and returns the status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HyStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            HyStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HyStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn settings_arg(p: *const c_char) -> Result<Settings, Fail> {
    let s = match opt_str_arg(p, "settings_toml")? {
        None => Settings::default(),
        Some(src) => toml::from_str(src).map_err(|e| Fail(HyStatus::Config, e.message().to_string()))?,
    };
    s.validate()?;
    Ok(s)
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(HyStatus::Invalid, "report contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn arc_at<'a>(arcs: *const HyArcs, k: usize) -> Result<&'a HybridArc, Fail> {
    let a = arcs.as_ref().ok_or_else(|| null("arcs"))?;
    a.0.get(k).ok_or_else(|| {
        Fail(
            HyStatus::OutOfRange,
            format!("arc index {k} out of range (have {})", a.0.len()),
        )
    })
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn hy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a built-in scenario by id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hy_scenario_builtin(id: *const c_char, out: *mut *mut HyScenario) -> HyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = str_arg(id, "id")?;
        let s = scenarios::by_id(id)?;
        *out = Box::into_raw(Box::new(HyScenario(s)));
        Ok(())
    })
}

/// Parses a scenario from TOML source. A `[settings]` table is ignored here;
/// pass settings to each call instead.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hy_scenario_from_toml(src: *const c_char, out: *mut *mut HyScenario) -> HyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, _) = config::parse(str_arg(src, "src")?)?;
        *out = Box::into_raw(Box::new(HyScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from a scenario constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hy_scenario_free(s: *mut HyScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// State dimension of the scenario, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn hy_scenario_dim(s: *const HyScenario) -> usize {
    s.as_ref().map_or(0, |s| s.0.system.dim())
}

/// Simulates from `x0` (length `n`), or from the scenario's default initial
/// state when `x0` is NULL.
///
/// # Safety
/// `s` must be a live scenario; `x0` must be NULL or point to `n` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hy_simulate(
    s: *const HyScenario,
    x0: *const f64,
    n: usize,
    settings_toml: *const c_char,
    out: *mut *mut HyArcs,
) -> HyStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(|| null("scenario"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let set = settings_arg(settings_toml)?;
        let x0 = if x0.is_null() {
            s.x0.clone()
        } else {
            std::slice::from_raw_parts(x0, n).to_vec()
        };
        let arcs = simulate(&s.system, &x0, &set.budget, set.policy)?;
        *out = Box::into_raw(Box::new(HyArcs(arcs)));
        Ok(())
    })
}

/// # Safety
/// `a` must come from [`hy_simulate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hy_arcs_free(a: *mut HyArcs) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Number of arcs, or 0 for NULL.
///
/// # Safety
/// `a` must be NULL or a live arc set.
#[no_mangle]
pub unsafe extern "C" fn hy_arcs_len(a: *const HyArcs) -> usize {
    a.as_ref().map_or(0, |a| a.0.len())
}

/// Final ordinary time and jump count of arc `k`.
///
/// # Safety
/// `a` must be a live arc set; `t` and `j` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hy_arc_final_time(a: *const HyArcs, k: usize, t: *mut f64, j: *mut usize) -> HyStatus {
    guard(|| {
        let arc = arc_at(a, k)?;
        if t.is_null() || j.is_null() {
            return Err(null("t or j"));
        }
        let ft = arc.final_time();
        *t = ft.t;
        *j = ft.j;
        Ok(())
    })
}

/// Copies the final state of arc `k` into `buf` (length `n`, at least the
/// state dimension).
///
/// # Safety
/// `a` must be a live arc set; `buf` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hy_arc_final_state(a: *const HyArcs, k: usize, buf: *mut f64, n: usize) -> HyStatus {
    guard(|| {
        let arc = arc_at(a, k)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let x = arc.final_state();
        if n < x.len() {
            return Err(Fail(
                HyStatus::Dimension,
                format!("buffer holds {n} values, state has {}", x.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, x.len()).copy_from_slice(x);
        Ok(())
    })
}

/// Whether arc `k` was classified as genuinely Zeno.
///
/// # Safety
/// `a` must be a live arc set; `zeno` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hy_arc_is_zeno(a: *const HyArcs, k: usize, zeno: *mut bool) -> HyStatus {
    guard(|| {
        let arc = arc_at(a, k)?;
        if zeno.is_null() {
            return Err(null("zeno"));
        }
        *zeno = arc.flags.genuinely_zeno;
        Ok(())
    })
}

/// Monitors the scenario's until formula. `mode` is "strong", "weak" or NULL
/// for the scenario's own mode. `report` receives the JSON report when not
/// NULL.
///
/// # Safety
/// `s` must be a live scenario; string arguments NULL or NUL-terminated;
/// `verdict` writable; `report` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hy_monitor(
    s: *const HyScenario,
    mode: *const c_char,
    settings_toml: *const c_char,
    verdict: *mut HyVerdict,
    report: *mut *mut c_char,
) -> HyStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(|| null("scenario"))?.0;
        if verdict.is_null() {
            return Err(null("verdict"));
        }
        let set = settings_arg(settings_toml)?;
        let mode: Option<UntilMode> = opt_str_arg(mode, "mode")?.map(str::parse).transpose()?;
        let r = run::monitor(s, mode, &set)?;
        *verdict = match r.verdict {
            Verdict::Satisfied => HyVerdict::Satisfied,
            Verdict::Violated => HyVerdict::Violated,
            Verdict::Unknown => HyVerdict::Unknown,
        };
        if !report.is_null() {
            out_string(report, report::body(&r))?;
        }
        Ok(())
    })
}

/// Checks the conditions of `theorem` (names as in the CLI). `variant` is
/// "a".."d" or NULL. `exit_code` receives the CLI exit code: 0 certified,
/// 1 failed or violated, 4 unknown.
///
/// # Safety
/// `s` must be a live scenario; string arguments NULL or NUL-terminated
/// (`theorem` non-NULL); `exit_code` writable; `report` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hy_certify(
    s: *const HyScenario,
    theorem: *const c_char,
    variant: *const c_char,
    settings_toml: *const c_char,
    exit_code: *mut i32,
    report: *mut *mut c_char,
) -> HyStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(|| null("scenario"))?.0;
        if exit_code.is_null() {
            return Err(null("exit_code"));
        }
        let set = settings_arg(settings_toml)?;
        let theorem: Theorem = str_arg(theorem, "theorem")?.parse()?;
        let variant: Option<EciVariant> = opt_str_arg(variant, "variant")?.map(str::parse).transpose()?;
        let out = run::certify(s, theorem, variant, &set)?;
        *exit_code = out.exit_code();
        if !report.is_null() {
            out_string(report, report::body(&out))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments_are_reported() {
        let st = unsafe { hy_scenario_builtin(ptr::null(), ptr::null_mut()) };
        assert_eq!(st, HyStatus::NullPointer);
        assert!(!hy_last_error().is_null());
        assert_eq!(unsafe { hy_arcs_len(ptr::null()) }, 0);
        unsafe { hy_string_free(ptr::null_mut()) };
    }
}
