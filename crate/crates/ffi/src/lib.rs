//! C interface to the benchmark runner.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a `PflabStatus`
//! and leaves a message retrievable with `pflab_last_error` on the calling
//! thread.

use phasefield_lab::benchmarks::{self, BenchmarkReport, RunError};
use phasefield_lab::config::RunConfig;
use phasefield_lab::driver::DriverError;
use phasefield_lab::dump::FieldDump;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PflabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    /// The state became non-finite or a cell left the simplex.
    Numerical = 4,
    /// The RHS-evaluation budget ran out.
    Budget = 5,
    /// The requested field does not exist.
    NotFound = 6,
    /// The output buffer is smaller than the data; the needed length is
    /// still reported.
    BufferTooSmall = 7,
    Setup = 8,
    Panic = 9,
}

/// A configured run.
pub struct PflabRun {
    config: RunConfig,
}

/// The outcome of a finished run.
pub struct PflabReport {
    report: BenchmarkReport,
    fields: FieldDump,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PflabSummary {
    pub reference: f64,
    pub measured: f64,
    pub error: f64,
    pub relative_error: f64,
    pub rhs_evals: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub dt_e: f64,
    pub final_time: f64,
    /// 1 when an equilibrium run met its criterion, 0 when it hit the time
    /// cap, -1 for fixed-horizon runs.
    pub converged: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PflabFrame {
    pub time: f64,
    pub observable: f64,
    pub energy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn fail(status: PflabStatus, msg: impl Into<String>) -> PflabStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PflabStatus) -> PflabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == PflabStatus::Ok {
                set_error("");
            }
            s
        }
        Err(e) => {
            let msg = e
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| e.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PflabStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PflabStatus> {
    if p.is_null() {
        return Err(fail(PflabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PflabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pflab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pflab_status_str(status: PflabStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PflabStatus::Ok => c"ok",
        PflabStatus::NullPointer => c"null pointer",
        PflabStatus::InvalidUtf8 => c"invalid UTF-8",
        PflabStatus::Config => c"invalid configuration",
        PflabStatus::Numerical => c"numerical failure",
        PflabStatus::Budget => c"evaluation budget exhausted",
        PflabStatus::NotFound => c"not found",
        PflabStatus::BufferTooSmall => c"buffer too small",
        PflabStatus::Setup => c"benchmark setup failed",
        PflabStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

#[no_mangle]
pub extern "C" fn pflab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a run of `benchmark` ("embedding", "triple-junction",
/// "single-grain" or "stefan") with default settings.
///
/// # Safety
/// `benchmark` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pflab_run_new(benchmark: *const c_char, out: *mut *mut PflabRun) -> PflabStatus {
    guard(|| {
        if out.is_null() {
            return fail(PflabStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let name = tri!(str_arg(benchmark, "benchmark"));
        let mut config = RunConfig::default();
        if let Err(e) = config.set("benchmark", name).and_then(|_| config.validate()) {
            return fail(PflabStatus::Config, e.to_string());
        }
        *out = Box::into_raw(Box::new(PflabRun { config }));
        PflabStatus::Ok
    })
}

/// Sets a configuration key, using the same keys and values as the
/// configuration file (`integrator`, `dt_factor`, `tol_phi_abs`, `dx`,
/// `end_time`, `budget`, ...).
///
/// # Safety
/// `run` must come from `pflab_run_new`; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pflab_run_set(run: *mut PflabRun, key: *const c_char, value: *const c_char) -> PflabStatus {
    guard(|| {
        let Some(run) = run.as_mut() else {
            return fail(PflabStatus::NullPointer, "run is null");
        };
        let key = tri!(str_arg(key, "key"));
        let value = tri!(str_arg(value, "value"));
        let mut next = run.config.clone();
        match next.set(key, value).and_then(|_| next.validate()) {
            Ok(()) => {
                run.config = next;
                PflabStatus::Ok
            }
            Err(e) => fail(PflabStatus::Config, e.to_string()),
        }
    })
}

/// # Safety
/// `run` must come from `pflab_run_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn pflab_run_free(run: *mut PflabRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Executes the run to its termination rule.
///
/// # Safety
/// `run` must come from `pflab_run_new`; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pflab_run_execute(run: *const PflabRun, out: *mut *mut PflabReport) -> PflabStatus {
    guard(|| {
        if out.is_null() {
            return fail(PflabStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(run) = run.as_ref() else {
            return fail(PflabStatus::NullPointer, "run is null");
        };
        let spec = match run.config.run_spec() {
            Ok(s) => s,
            Err(e) => return fail(PflabStatus::Config, e.to_string()),
        };
        match benchmarks::run(&spec, &mut ()) {
            Ok(report) => {
                let fields = FieldDump::from_state(&report.final_state);
                *out = Box::into_raw(Box::new(PflabReport { report, fields }));
                PflabStatus::Ok
            }
            Err(e) => {
                let status = match &e {
                    RunError::Driver(DriverError::Budget(_)) => PflabStatus::Budget,
                    RunError::Driver(_) => PflabStatus::Numerical,
                    RunError::Invalid(_) => PflabStatus::Config,
                    RunError::Bench(_) | RunError::System(_) => PflabStatus::Setup,
                };
                fail(status, e.to_string())
            }
        }
    })
}

/// # Safety
/// `report` must come from `pflab_run_execute`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pflab_report_summary(report: *const PflabReport, out: *mut PflabSummary) -> PflabStatus {
    guard(|| {
        let (Some(rep), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(PflabStatus::NullPointer, "report or out is null");
        };
        let r = &rep.report;
        *out = PflabSummary {
            reference: r.reference,
            measured: r.measured,
            error: r.error,
            relative_error: r.relative_error(),
            rhs_evals: r.rhs_evals,
            accepted: r.accepted,
            rejected: r.rejected,
            dt_e: r.dt_e,
            final_time: r.final_state.time,
            converged: r.converged.map_or(-1, i32::from),
        };
        PflabStatus::Ok
    })
}

/// Copies up to `len` output frames into `buf` and stores the total count
/// in `count`. `buf` may be null when `len` is 0.
///
/// # Safety
/// `report` must come from `pflab_run_execute`; `buf` must hold `len`
/// frames; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pflab_report_frames(
    report: *const PflabReport,
    buf: *mut PflabFrame,
    len: usize,
    count: *mut usize,
) -> PflabStatus {
    guard(|| {
        let (Some(rep), Some(count)) = (report.as_ref(), count.as_mut()) else {
            return fail(PflabStatus::NullPointer, "report or count is null");
        };
        let frames = &rep.report.frames;
        *count = frames.len();
        if len < frames.len() {
            return fail(PflabStatus::BufferTooSmall, format!("{} frames do not fit in {len}", frames.len()));
        }
        if buf.is_null() {
            return fail(PflabStatus::NullPointer, "buf is null");
        }
        for (i, f) in frames.iter().enumerate() {
            *buf.add(i) = PflabFrame { time: f.time, observable: f.observable, energy: f.energy };
        }
        PflabStatus::Ok
    })
}

/// Copies the final field `name` ("phi0", "phi1", ..., "c") into `buf`,
/// first axis fastest, and stores the cell count in `count`.
///
/// # Safety
/// `report` must come from `pflab_run_execute`; `name` must be a
/// NUL-terminated string; `buf` must hold `len` doubles; `count` valid.
#[no_mangle]
pub unsafe extern "C" fn pflab_report_field(
    report: *const PflabReport,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> PflabStatus {
    guard(|| {
        let (Some(rep), Some(count)) = (report.as_ref(), count.as_mut()) else {
            return fail(PflabStatus::NullPointer, "report or count is null");
        };
        let name = tri!(str_arg(name, "name"));
        let Some(values) = rep.fields.field(name) else {
            return fail(PflabStatus::NotFound, format!("no field `{name}` (have {})", rep.fields.names.join(", ")));
        };
        *count = values.len();
        if len < values.len() {
            return fail(PflabStatus::BufferTooSmall, format!("{} values do not fit in {len}", values.len()));
        }
        if buf.is_null() {
            return fail(PflabStatus::NullPointer, "buf is null");
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        PflabStatus::Ok
    })
}

/// Grid extents of the final fields; unused trailing entries are 0.
///
/// # Safety
/// `report` must come from `pflab_run_execute`; `extents` must hold 3
/// values.
#[no_mangle]
pub unsafe extern "C" fn pflab_report_extents(report: *const PflabReport, extents: *mut usize) -> PflabStatus {
    guard(|| {
        let Some(rep) = report.as_ref() else {
            return fail(PflabStatus::NullPointer, "report is null");
        };
        if extents.is_null() {
            return fail(PflabStatus::NullPointer, "extents is null");
        }
        for i in 0..3 {
            *extents.add(i) = rep.fields.extents.get(i).copied().unwrap_or(0);
        }
        PflabStatus::Ok
    })
}

/// # Safety
/// `report` must come from `pflab_run_execute` or be null.
#[no_mangle]
pub unsafe extern "C" fn pflab_report_free(report: *mut PflabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Equilibrium dihedral angle (radians) of a lens on a grain boundary.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pflab_theta_eq(gamma_gb: f64, gamma_ab: f64, out: *mut f64) -> PflabStatus {
    guard(|| {
        let Some(out) = out.as_mut() else {
            return fail(PflabStatus::NullPointer, "out is null");
        };
        match benchmarks::theta_eq(gamma_gb, gamma_ab) {
            Ok(v) => {
                *out = v;
                PflabStatus::Ok
            }
            Err(e) => fail(PflabStatus::Config, e.to_string()),
        }
    })
}

/// Planar Stefan growth constant `A` with `X(t) = A sqrt(t)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pflab_stefan_growth_constant(
    diffusivity: f64,
    c_alpha: f64,
    c_beta: f64,
    c_alpha_beta: f64,
    c_beta_alpha: f64,
    out: *mut f64,
) -> PflabStatus {
    guard(|| {
        let Some(out) = out.as_mut() else {
            return fail(PflabStatus::NullPointer, "out is null");
        };
        match benchmarks::stefan_growth_constant(diffusivity, c_alpha, c_beta, c_alpha_beta, c_beta_alpha) {
            Ok(v) => {
                *out = v;
                PflabStatus::Ok
            }
            Err(e) => fail(PflabStatus::Config, e.to_string()),
        }
    })
}
