//! C interface: opaque handles over the run pipeline plus a few closed-form
//! constants. All functions are panic-safe; failures set a thread-local
//! message readable through [`hs_last_error`].
//!
//! Ownership: every pointer returned by an `hs_*` constructor is owned by
//! the caller and released with the matching `hs_*_free`. Strings returned
//! by `hs_result_to_json` are released with `hs_string_free`. Accessors
//! never take ownership.

use halfspace::config::RunSpec;
use halfspace::error::Error;
use halfspace::fields::HalfField;
use halfspace::linear::compute_c1;
use halfspace::semilinear::{epsilon_star, run_halfspace, SimConfig, SimResult, SimStatus};
use halfspace::symbols::fujita_exponent;
use serde_json::json;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Outcome of an `hs_*` call that does not return a pointer.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HsStatus {
    HsOk = 0,
    /// A required pointer argument was null.
    HsErrNullArg = 1,
    /// Arguments were structurally invalid (bad index, non-UTF-8 string).
    HsErrInvalidArg = 2,
    /// The spec or the parameters were rejected.
    HsErrConfig = 3,
    /// The computation failed numerically.
    HsErrNumerics = 4,
    /// File access failed.
    HsErrIo = 5,
    /// An internal panic was contained.
    HsErrPanic = 6,
}

/// Classification of a finished run.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HsRunStatus {
    /// The handle was null (see `hs_last_error`).
    HsRunInvalid = -1,
    HsRunBlewUp = 0,
    HsRunDecayed = 1,
    HsRunUndecided = 2,
}

/// One scalar sample of a run's history.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HsRecord {
    pub t: f64,
    pub sup_norm: f64,
    /// Half-space first moment.
    pub m1: f64,
    /// Value at the moving probe; NaN when the run did not track one.
    pub probe_value: f64,
    /// Step size used to leave this state.
    pub dt: f64,
}

/// Parsed and materialized run spec. Opaque.
pub struct HsConfig {
    config: SimConfig,
    initial: HalfField,
    echo: String,
}

/// Finished run. Opaque.
pub struct HsResult {
    result: SimResult,
    expected_rate: f64,
    echo: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").expect("static text"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> HsStatus {
    match err {
        Error::Config(_) => HsStatus::HsErrConfig,
        Error::Numerics(_) => HsStatus::HsErrNumerics,
        Error::Io(_) => HsStatus::HsErrIo,
    }
}

/// Last failure message on this thread, or null if the most recent call
/// succeeded. The pointer stays valid until the next `hs_*` call on the
/// same thread; copy it if it must outlive that.
#[no_mangle]
pub extern "C" fn hs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, HsStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(HsStatus::HsErrNullArg);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        HsStatus::HsErrInvalidArg
    })
}

fn build_config(spec: RunSpec, base_dir: &Path) -> Result<HsConfig, Error> {
    let echo = spec.echo_toml();
    let (config, initial) = spec.materialize(base_dir)?;
    Ok(HsConfig { config, initial, echo })
}

fn guarded_ptr<T>(body: impl FnOnce() -> Result<T, Error>) -> *mut T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(value)) => {
            clear_error();
            Box::into_raw(Box::new(value))
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic".into());
            std::ptr::null_mut()
        }
    }
}

fn guarded_status(body: impl FnOnce() -> Result<(), (HsStatus, String)>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            HsStatus::HsOk
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HsStatus::HsErrPanic
        }
    }
}

/// Parse a TOML run spec from memory and materialize it. Relative CSV paths
/// resolve against `base_dir` (or the working directory when null).
/// Returns null on failure; see `hs_last_error`.
///
/// # Safety
/// `toml_text` must be a valid NUL-terminated string; `base_dir` must be
/// null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hs_config_parse(
    toml_text: *const c_char,
    base_dir: *const c_char,
) -> *mut HsConfig {
    let text = match read_str(toml_text, "toml_text") {
        Ok(s) => s.to_string(),
        Err(_) => return std::ptr::null_mut(),
    };
    let base = if base_dir.is_null() {
        ".".to_string()
    } else {
        match read_str(base_dir, "base_dir") {
            Ok(s) => s.to_string(),
            Err(_) => return std::ptr::null_mut(),
        }
    };
    guarded_ptr(move || build_config(RunSpec::from_toml_str(&text)?, Path::new(&base)))
}

/// Load and materialize a TOML run spec file. Relative CSV paths resolve
/// against the file's directory. Returns null on failure.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hs_config_load(path: *const c_char) -> *mut HsConfig {
    let path = match read_str(path, "path") {
        Ok(s) => s.to_string(),
        Err(_) => return std::ptr::null_mut(),
    };
    guarded_ptr(move || {
        let path = Path::new(&path);
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        build_config(RunSpec::load(path)?, &base)
    })
}

/// Release a config handle. Null is a no-op.
///
/// # Safety
/// `config` must be null or a pointer from `hs_config_parse`/
/// `hs_config_load` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hs_config_free(config: *mut HsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the simulation described by a config handle. The handle stays valid
/// and can be rerun. Returns null on failure.
///
/// # Safety
/// `config` must be a live pointer from `hs_config_parse`/`hs_config_load`.
#[no_mangle]
pub unsafe extern "C" fn hs_simulate(config: *const HsConfig) -> *mut HsResult {
    if config.is_null() {
        set_error("config is null".into());
        return std::ptr::null_mut();
    }
    let cfg = &*config;
    guarded_ptr(|| {
        let result = run_halfspace(cfg.config.clone(), &cfg.initial)?;
        Ok(HsResult {
            result,
            expected_rate: cfg.config.decay_rate(),
            echo: cfg.echo.clone(),
        })
    })
}

/// Release a result handle. Null is a no-op.
///
/// # Safety
/// `result` must be null or a pointer from `hs_simulate` that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn hs_result_free(result: *mut HsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Classification of the run.
///
/// # Safety
/// `result` must be null or a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_status(result: *const HsResult) -> HsRunStatus {
    if result.is_null() {
        set_error("result is null".into());
        return HsRunStatus::HsRunInvalid;
    }
    clear_error();
    match (*result).result.status {
        SimStatus::BlewUp { .. } => HsRunStatus::HsRunBlewUp,
        SimStatus::Decayed { .. } => HsRunStatus::HsRunDecayed,
        SimStatus::Undecided => HsRunStatus::HsRunUndecided,
    }
}

/// Extrapolated singular time; NaN unless the run blew up.
///
/// # Safety
/// `result` must be null or a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_t_star(result: *const HsResult) -> f64 {
    if result.is_null() {
        set_error("result is null".into());
        return f64::NAN;
    }
    clear_error();
    match (*result).result.status {
        SimStatus::BlewUp { t_star } => t_star,
        _ => f64::NAN,
    }
}

/// Fitted sup-norm decay slope; NaN unless the run decayed.
///
/// # Safety
/// `result` must be null or a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_fitted_rate(result: *const HsResult) -> f64 {
    if result.is_null() {
        set_error("result is null".into());
        return f64::NAN;
    }
    clear_error();
    match (*result).result.status {
        SimStatus::Decayed { fitted_rate } => fitted_rate,
        _ => f64::NAN,
    }
}

/// Time the run ended (threshold crossing or horizon). NaN on null.
///
/// # Safety
/// `result` must be null or a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_t_final(result: *const HsResult) -> f64 {
    if result.is_null() {
        set_error("result is null".into());
        return f64::NAN;
    }
    clear_error();
    (*result).result.t_final
}

/// Number of recorded history samples. Zero on null.
///
/// # Safety
/// `result` must be null or a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_record_count(result: *const HsResult) -> usize {
    if result.is_null() {
        set_error("result is null".into());
        return 0;
    }
    clear_error();
    (*result).result.records.len()
}

/// Copy history sample `index` into `out`.
///
/// # Safety
/// `result` must be a live pointer from `hs_simulate`; `out` must point to
/// writable memory for one `HsRecord`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_record(
    result: *const HsResult,
    index: usize,
    out: *mut HsRecord,
) -> HsStatus {
    guarded_status(|| {
        if result.is_null() {
            return Err((HsStatus::HsErrNullArg, "result is null".into()));
        }
        if out.is_null() {
            return Err((HsStatus::HsErrNullArg, "out is null".into()));
        }
        let records = &(*result).result.records;
        let Some(r) = records.get(index) else {
            return Err((
                HsStatus::HsErrInvalidArg,
                format!("record index {index} out of range 0..{}", records.len()),
            ));
        };
        *out = HsRecord {
            t: r.t,
            sup_norm: r.sup_norm,
            m1: r.m1,
            probe_value: r.probe_value.unwrap_or(f64::NAN),
            dt: r.dt,
        };
        Ok(())
    })
}

/// Serialize the run (status, diagnostics, history, spec echo) as a JSON
/// document. Returns a heap string to release with `hs_string_free`, or
/// null on failure.
///
/// # Safety
/// `result` must be a live pointer from `hs_simulate`.
#[no_mangle]
pub unsafe extern "C" fn hs_result_to_json(result: *const HsResult) -> *mut c_char {
    if result.is_null() {
        set_error("result is null".into());
        return std::ptr::null_mut();
    }
    let r = &*result;
    match catch_unwind(AssertUnwindSafe(|| {
        let doc = json!({
            "status": r.result.status,
            "expected_rate": r.expected_rate,
            "t_final": r.result.t_final,
            "diagnostics": r.result.diagnostics,
            "records": r.result.records,
            "spec": r.echo,
        });
        serde_json::to_string_pretty(&doc)
    })) {
        Ok(Ok(text)) => {
            clear_error();
            CString::new(text.replace('\0', " "))
                .map(CString::into_raw)
                .unwrap_or(std::ptr::null_mut())
        }
        Ok(Err(e)) => {
            set_error(format!("serialization failed: {e}"));
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic".into());
            std::ptr::null_mut()
        }
    }
}

/// Release a string returned by `hs_result_to_json`. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer from `hs_result_to_json` that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn hs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Critical exponent `1 + beta / (dim + 1)` in the `u^p` normalization;
/// the threshold for `alpha` in `|u|^alpha u` is this minus one. NaN on bad
/// arguments.
#[no_mangle]
pub extern "C" fn hs_fujita_exponent(beta: f64, dim: usize) -> f64 {
    match catch_unwind(|| fujita_exponent(beta, dim)) {
        Ok(Ok(v)) => {
            clear_error();
            v
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            f64::NAN
        }
        Err(_) => {
            set_error("internal panic".into());
            f64::NAN
        }
    }
}

/// Data-norm smallness threshold of the global regime for decay constant
/// `c_decay`; written to `out`.
///
/// # Safety
/// `out` must point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn hs_epsilon_star(
    alpha: f64,
    beta: f64,
    dim: usize,
    c_decay: f64,
    out: *mut f64,
) -> HsStatus {
    guarded_status(|| {
        if out.is_null() {
            return Err((HsStatus::HsErrNullArg, "out is null".into()));
        }
        match epsilon_star(alpha, beta, dim, c_decay) {
            Ok(v) => {
                *out = v;
                Ok(())
            }
            Err(e) => Err((status_of(&e), e.to_string())),
        }
    })
}

/// Probe-plateau constant `C1(gamma)` for the symbol expansion
/// `1 - a |xi|^beta`; written to `out`.
///
/// # Safety
/// `out` must point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn hs_compute_c1(
    a: f64,
    beta: f64,
    dim: usize,
    gamma: f64,
    out: *mut f64,
) -> HsStatus {
    guarded_status(|| {
        if out.is_null() {
            return Err((HsStatus::HsErrNullArg, "out is null".into()));
        }
        match compute_c1(a, beta, dim, gamma) {
            Ok(v) => {
                *out = v;
                Ok(())
            }
            Err(e) => Err((status_of(&e), e.to_string())),
        }
    })
}
