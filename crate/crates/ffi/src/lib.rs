//! C ABI over `curveflow`.
//!
//! Objects are opaque handles created by `cf_*_new`/`cf_*_from_*` functions
//! and released with the matching `cf_*_free`. Every fallible function
//! returns a `CfStatus`; the message of the last failure on the calling
//! thread is available through `cf_last_error`. Strings returned by the
//! library are released with `cf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curveflow::estimates::{run_suite, CheckConfig, Suite};
use curveflow::flow::{dyadic_step_params, run, FlowOptions, FlowTrace};
use curveflow::forcing::{mollify, ForcingField, MollifierParams};
use curveflow::geom::vec2;
use curveflow::network::{circle, steiner_triod, CurveNetwork};
use curveflow::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    InvalidNetwork = 5,
    StepFailed = 6,
    Topology = 7,
    Precondition = 8,
    Panic = 9,
}

pub struct CfNetwork(CurveNetwork);
pub struct CfForcing(ForcingField);
pub struct CfTrace(FlowTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::InvalidArgument(_) => CfStatus::InvalidArgument,
        Error::Parse(_) | Error::Json(_) | Error::Grid(_) => CfStatus::Parse,
        Error::Io(_) => CfStatus::Io,
        Error::MeshCorruption(_)
        | Error::InvalidNetwork(_)
        | Error::JunctionVertex(_)
        | Error::Orientation(_)
        | Error::NoAdjacency => CfStatus::InvalidNetwork,
        Error::Step { .. } => CfStatus::StepFailed,
        Error::Topology(_) => CfStatus::Topology,
        Error::Precondition(_) => CfStatus::Precondition,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (CfStatus, String)>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CfStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CfStatus, String) {
    (CfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CfStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (CfStatus::Parse, format!("{what} is not UTF-8: {e}")))
}

fn owned_string(s: String) -> Result<*mut c_char, (CfStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|e| (CfStatus::Parse, e.to_string()))
}

/// Copies the last error message of this thread into `buf` (nul-terminated,
/// truncated to `cap`). Returns the full message length, 0 if none.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cf_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Polygon with `n` vertices on the circle of radius `r` about `(cx, cy)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_network_circle(r: f64, n: usize, cx: f64, cy: f64, out: *mut *mut CfNetwork) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        if !(r > 0.0 && r.is_finite()) || n < 3 {
            return Err((CfStatus::InvalidArgument, "circle needs r > 0 and n >= 3".into()));
        }
        *o = Box::into_raw(Box::new(CfNetwork(circle(r, n, vec2(cx, cy)))));
        Ok(())
    })
}

/// Symmetric triod with arms of length `l`, each split into `n` segments.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_network_triod(l: f64, n: usize, out: *mut *mut CfNetwork) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        if !(l > 0.0 && l.is_finite()) || n == 0 {
            return Err((CfStatus::InvalidArgument, "triod needs l > 0 and n >= 1".into()));
        }
        *o = Box::into_raw(Box::new(CfNetwork(steiner_triod(l, n))));
        Ok(())
    })
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_network_from_json(json: *const c_char, out: *mut *mut CfNetwork) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let net = CurveNetwork::from_json(text(json, "json")?).map_err(lib)?;
        *o = Box::into_raw(Box::new(CfNetwork(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_network_to_json(net: *const CfNetwork, out: *mut *mut c_char) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        *o = owned_string(arg(net, "net")?.0.to_json())?;
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_network_free(net: *mut CfNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Total length of the network.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_network_length(net: *const CfNetwork, out: *mut f64) -> CfStatus {
    guard(|| {
        *self::out(out, "out")? = arg(net, "net")?.0.length();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_network_vertex_count(net: *const CfNetwork, out: *mut usize) -> CfStatus {
    guard(|| {
        *self::out(out, "out")? = arg(net, "net")?.0.vertices().len();
        Ok(())
    })
}

/// Writes vertex coordinates as `x0, y0, x1, y1, ...` into `xy`, which must
/// hold `2 * cf_network_vertex_count` doubles.
///
/// # Safety
/// `xy` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_network_vertices(net: *const CfNetwork, xy: *mut f64, cap: usize) -> CfStatus {
    guard(|| {
        let v = arg(net, "net")?.0.vertices();
        if xy.is_null() {
            return Err(null("xy"));
        }
        if cap < 2 * v.len() {
            return Err((CfStatus::InvalidArgument, format!("buffer holds {cap} doubles, need {}", 2 * v.len())));
        }
        let dst = std::slice::from_raw_parts_mut(xy, 2 * v.len());
        for (k, p) in v.iter().enumerate() {
            dst[2 * k] = p.x;
            dst[2 * k + 1] = p.y;
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_forcing_zero(out: *mut *mut CfForcing) -> CfStatus {
    guard(|| {
        *self::out(out, "out")? = Box::into_raw(Box::new(CfForcing(ForcingField::Zero)));
        Ok(())
    })
}

/// Field from its JSON description, e.g.
/// `{"kind": "gaussian-swirl", "amplitude": 1, "width": 0.3}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_forcing_from_json(json: *const c_char, out: *mut *mut CfForcing) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let u = ForcingField::from_json(text(json, "json")?).map_err(lib)?;
        u.check().map_err(lib)?;
        *o = Box::into_raw(Box::new(CfForcing(u)));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_forcing_mollify(u: *const CfForcing, m: u32, out: *mut *mut CfForcing) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let um = mollify(&arg(u, "u")?.0, &MollifierParams { m }).map_err(lib)?;
        *o = Box::into_raw(Box::new(CfForcing(um)));
        Ok(())
    })
}

/// Writes `u(x, y, t)` into `out_uv[0..2]`.
///
/// # Safety
/// `out_uv` must point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_forcing_value(u: *const CfForcing, x: f64, y: f64, t: f64, out_uv: *mut f64) -> CfStatus {
    guard(|| {
        let v = arg(u, "u")?.0.value(&vec2(x, y), t);
        if out_uv.is_null() {
            return Err(null("out_uv"));
        }
        *out_uv = v.x;
        *out_uv.add(1) = v.y;
        Ok(())
    })
}

/// # Safety
/// `u` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_forcing_free(u: *mut CfForcing) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// Runs the flow on `[0, t_end]`. `options_json` may be null for defaults.
/// A run stopped by a step failure still yields a trace; check
/// `cf_trace_failed`.
///
/// # Safety
/// Handles must be live; `options_json` null or nul-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cf_flow_run(
    net: *const CfNetwork,
    u: *const CfForcing,
    t_end: f64,
    options_json: *const c_char,
    out: *mut *mut CfTrace,
) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let opts: FlowOptions = if options_json.is_null() {
            FlowOptions::default()
        } else {
            serde_json::from_str(text(options_json, "options_json")?)
                .map_err(|e| (CfStatus::Parse, format!("flow options: {e}")))?
        };
        let trace = run(&arg(net, "net")?.0, &arg(u, "u")?.0, t_end, &opts).map_err(lib)?;
        *o = Box::into_raw(Box::new(CfTrace(trace)));
        Ok(())
    })
}

/// # Safety
/// `jsonl` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_from_jsonl(jsonl: *const c_char, out: *mut *mut CfTrace) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        let t = FlowTrace::from_jsonl(text(jsonl, "jsonl")?).map_err(lib)?;
        *o = Box::into_raw(Box::new(CfTrace(t)));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_to_jsonl(trace: *const CfTrace, out: *mut *mut c_char) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        *o = owned_string(arg(trace, "trace")?.0.to_jsonl().map_err(lib)?)?;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_snapshot_count(trace: *const CfTrace, out: *mut usize) -> CfStatus {
    guard(|| {
        *self::out(out, "out")? = arg(trace, "trace")?.0.snapshots.len();
        Ok(())
    })
}

/// Time, mass, `H` and `U` of snapshot `k`, written to `out4[0..4]`.
///
/// # Safety
/// `out4` must point to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_snapshot(trace: *const CfTrace, k: usize, out4: *mut f64) -> CfStatus {
    guard(|| {
        let t = &arg(trace, "trace")?.0;
        let s = t.snapshots.get(k).ok_or_else(|| (CfStatus::InvalidArgument, format!("snapshot {k} out of range")))?;
        if out4.is_null() {
            return Err(null("out4"));
        }
        for (i, v) in [s.t, s.ledger.mass, s.ledger.h, s.ledger.u].into_iter().enumerate() {
            *out4.add(i) = v;
        }
        Ok(())
    })
}

/// Final network of the trace as a new handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_final_network(trace: *const CfTrace, out: *mut *mut CfNetwork) -> CfStatus {
    guard(|| {
        let o = self::out(out, "out")?;
        *o = Box::into_raw(Box::new(CfNetwork(arg(trace, "trace")?.0.final_network().clone())));
        Ok(())
    })
}

/// Sets `*out` to 1 if the run stopped early, 0 otherwise.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_failed(trace: *const CfTrace, out: *mut i32) -> CfStatus {
    guard(|| {
        *self::out(out, "out")? = i32::from(arg(trace, "trace")?.0.failure.is_some());
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_trace_free(trace: *mut CfTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Runs a check suite (`all`, `budgets`, `brakke`, `phases` or `structure`)
/// with the given constant. Writes the JSON report to `report_json` and
/// 1/0 to `all_pass`.
///
/// # Safety
/// `trace` live, `suite` nul-terminated, outputs valid.
#[no_mangle]
pub unsafe extern "C" fn cf_verify(
    trace: *const CfTrace,
    suite: *const c_char,
    c_mz: f64,
    report_json: *mut *mut c_char,
    all_pass: *mut i32,
) -> CfStatus {
    guard(|| {
        let (rep, pass) = (self::out(report_json, "report_json")?, self::out(all_pass, "all_pass")?);
        let t = &arg(trace, "trace")?.0;
        let suite: Suite = text(suite, "suite")?.parse().map_err(lib)?;
        if c_mz.is_nan() || c_mz <= 0.0 {
            return Err((CfStatus::InvalidArgument, "c_mz must be positive".into()));
        }
        let cfg = CheckConfig { c_mz, ..CheckConfig::default() };
        let reports = run_suite(t, &t.budget, suite, &cfg).map_err(lib)?;
        *pass = i32::from(reports.iter().all(|r| r.pass));
        *rep = owned_string(serde_json::to_string(&reports).map_err(|e| (CfStatus::Parse, e.to_string()))?)?;
        Ok(())
    })
}

/// Dyadic step parameters `(c2, p, dt)` for `eps` in `(0, 1)` and `n >= 1`.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cf_dyadic_step_params(eps: f64, n: u32, c2: *mut u32, p: *mut i64, dt: *mut f64) -> CfStatus {
    guard(|| {
        let (oc, op, od) = (self::out(c2, "c2")?, self::out(p, "p")?, self::out(dt, "dt")?);
        let (a, b, c) = dyadic_step_params(eps, n).map_err(lib)?;
        (*oc, *op, *od) = (a, b, c);
        Ok(())
    })
}
