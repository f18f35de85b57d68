//! C ABI over `gradload`.
//!
//! Objects cross the boundary as opaque handles created by `gl_*_new` style
//! constructors and released with the matching `gl_*_free`. Every fallible
//! call returns a [`GlStatus`]; on failure the message is available from
//! [`gl_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use gradload::amplify::{self, LoadConfig, RunReport, Stage2Mode};
use gradload::distributions::{self, DistributionSpec, Family};
use gradload::gradient::{gradient_state, GradientSpec};
use gradload::resources::{tally_variant, Variant};
use gradload::{AmplitudeVector, Error, QuantizedAmplitudes};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ZeroVector = 3,
    OutOfRange = 4,
    BoundInvalid = 5,
    Unsupported = 6,
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlVariant {
    SandersV1 = 0,
    SandersV2 = 1,
    OursV1 = 2,
    OursV2 = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlMode {
    Amplify = 0,
    Postselect = 1,
}

/// Per-round gate counts. `toffoli_bound` is 0 when no bound applies.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GlTally {
    pub toffoli: size_t,
    pub toffoli_bound: size_t,
    pub sqrt_swap: size_t,
    pub t_gates: size_t,
    pub cnot: size_t,
    pub ancillas: size_t,
}

/// Normalized nonnegative target amplitudes.
pub struct GlAmplitudes(AmplitudeVector);

/// Fixed-point amplitudes with `g` bits each.
pub struct GlQuantized(QuantizedAmplitudes);

/// Outcome of a simulated loading run, with the conditional output state.
pub struct GlReport {
    report: RunReport,
    re: Vec<f64>,
    im: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GlStatus {
    match e {
        Error::ZeroVector | Error::NoOverlap => GlStatus::ZeroVector,
        Error::OutOfRange(_) | Error::WireCapExceeded { .. } => GlStatus::OutOfRange,
        Error::BoundInvalid { .. } => GlStatus::BoundInvalid,
        Error::Unsupported(_) => GlStatus::Unsupported,
        Error::Io(_) => GlStatus::Io,
        _ => GlStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GlStatus, String)>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            GlStatus::Panic
        }
    }
}

fn lift<T>(r: gradload::Result<T>) -> Result<T, (GlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GlStatus, String) {
    (GlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: size_t, what: &str) -> Result<&'a [T], (GlStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (GlStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, cap: size_t) -> Result<(), (GlStatus, String)> {
    if cap < src.len() {
        return Err((GlStatus::BufferTooSmall, format!("need {} entries, got {cap}", src.len())));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalizes `len` nonnegative values into a new handle.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_amplitudes_new(values: *const f64, len: size_t, out: *mut *mut GlAmplitudes) -> GlStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let a = lift(AmplitudeVector::new(v).and_then(|a| a.normalized()))?;
        write_out(out, Box::into_raw(Box::new(GlAmplitudes(a))), "out")
    })
}

/// Generates a named test distribution. `param` is the power-law exponent
/// or the normal width and is ignored by the other families; `seed` is used
/// by `random`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_amplitudes_generate(
    family: *const c_char,
    n: size_t,
    param: f64,
    seed: u64,
    out: *mut *mut GlAmplitudes,
) -> GlStatus {
    guard(|| {
        if family.is_null() {
            return Err(null("family"));
        }
        let name = CStr::from_ptr(family)
            .to_str()
            .map_err(|_| (GlStatus::InvalidArgument, "family is not UTF-8".to_string()))?;
        let fam = lift(Family::from_parts(name, Some(param), Some(param), seed))?;
        let a = lift(DistributionSpec::new(fam, n).and_then(|s| distributions::generate(&s)))?;
        write_out(out, Box::into_raw(Box::new(GlAmplitudes(a))), "out")
    })
}

/// # Safety
/// `a` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gl_amplitudes_free(a: *mut GlAmplitudes) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_amplitudes_len(a: *const GlAmplitudes) -> size_t {
    a.as_ref().map_or(0, |a| a.0.len())
}

/// Copies the normalized values into `out`, which holds `cap` doubles.
///
/// # Safety
/// `a` must be a live handle and `out` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_amplitudes_values(a: *const GlAmplitudes, out: *mut f64, cap: size_t) -> GlStatus {
    guard(|| copy_out(handle(a, "amplitudes")?.0.values(), out, cap))
}

/// Rounds toward zero to `g` bits, optionally shifting the largest
/// amplitude's leading one into the first bit.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_quantize(
    a: *const GlAmplitudes,
    g: size_t,
    shift: bool,
    out: *mut *mut GlQuantized,
) -> GlStatus {
    guard(|| {
        let q = lift(gradload::quantize(&handle(a, "amplitudes")?.0, g, shift))?;
        write_out(out, Box::into_raw(Box::new(GlQuantized(q))), "out")
    })
}

/// # Safety
/// `q` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gl_quantized_free(q: *mut GlQuantized) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// `q` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_quantized_n(q: *const GlQuantized) -> size_t {
    q.as_ref().map_or(0, |q| q.0.n())
}

/// # Safety
/// `q` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_quantized_g(q: *const GlQuantized) -> size_t {
    q.as_ref().map_or(0, |q| q.0.g())
}

/// # Safety
/// `q` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_quantized_shift(q: *const GlQuantized) -> u32 {
    q.as_ref().map_or(0, |q| q.0.shift())
}

/// Copies the fixed-point values `A_i` into `out`.
///
/// # Safety
/// `q` must be a live handle and `out` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_quantized_values(q: *const GlQuantized, out: *mut f64, cap: size_t) -> GlStatus {
    guard(|| copy_out(&handle(q, "quantized")?.0.values(), out, cap))
}

/// Stage overlaps `lambda1` and `lambda2` in closed form.
///
/// # Safety
/// `q` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn gl_overlaps(q: *const GlQuantized, lambda1: *mut f64, lambda2: *mut f64) -> GlStatus {
    guard(|| {
        let (l1, l2) = lift(amplify::stage_overlaps(&handle(q, "quantized")?.0))?;
        write_out(lambda1, l1, "lambda1")?;
        write_out(lambda2, l2, "lambda2")
    })
}

/// Simulates the two-stage loader. `alpha` may be null; when given, the
/// report carries the runtime bounds.
///
/// # Safety
/// `q` must be a live handle, `alpha` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_load_state(
    q: *const GlQuantized,
    alpha: *const GlAmplitudes,
    delta1: f64,
    delta2: f64,
    bootstrap: bool,
    mode: GlMode,
    out: *mut *mut GlReport,
) -> GlStatus {
    guard(|| {
        let q = handle(q, "quantized")?;
        let mut cfg = LoadConfig::new(delta1, delta2);
        cfg.bootstrap = bootstrap;
        cfg.mode = match mode {
            GlMode::Amplify => Stage2Mode::Amplify,
            GlMode::Postselect => Stage2Mode::Postselect,
        };
        cfg.alpha = alpha.as_ref().map(|a| a.0.clone());
        let (state, report) = lift(amplify::load_state(&q.0, &cfg))?;
        let re = state.amplitudes().iter().map(|c| c.re).collect();
        let im = state.amplitudes().iter().map(|c| c.im).collect();
        write_out(out, Box::into_raw(Box::new(GlReport { report, re, im })), "out")
    })
}

/// # Safety
/// `r` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gl_report_free(r: *mut GlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_report_final_fidelity(r: *const GlReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.report.final_fidelity)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_report_total_oracle_calls(r: *const GlReport) -> u64 {
    r.as_ref().map_or(0, |r| r.report.queries.total_oracle_calls)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_report_state_len(r: *const GlReport) -> size_t {
    r.as_ref().map_or(0, |r| r.re.len())
}

/// Copies the conditional output state, split into real and imaginary
/// parts. The global phase is whatever the simulation produced.
///
/// # Safety
/// `r` must be a live handle; `re` and `im` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_report_state(r: *const GlReport, re: *mut f64, im: *mut f64, cap: size_t) -> GlStatus {
    guard(|| {
        let r = handle(r, "report")?;
        copy_out(&r.re, re, cap)?;
        copy_out(&r.im, im, cap)
    })
}

/// Full report as JSON. Release with [`gl_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_report_to_json(r: *const GlReport, out: *mut *mut c_char) -> GlStatus {
    guard(|| {
        let text = serde_json::to_string(&handle(r, "report")?.report)
            .map_err(|e| (GlStatus::InvalidArgument, e.to_string()))?;
        let c = CString::new(text).map_err(|e| (GlStatus::InvalidArgument, e.to_string()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// Writes the `g` amplitudes `2^-(j+1)/2` of the gradient state scaled to
/// unit norm.
///
/// # Safety
/// `out` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_gradient_state(g: size_t, out: *mut f64, cap: size_t) -> GlStatus {
    guard(|| {
        let spec = lift(GradientSpec::binary(g))?;
        let amps: Vec<f64> = gradient_state(&spec).amplitudes().iter().map(|c| c.re).collect();
        copy_out(&amps, out, cap)
    })
}

/// Per-round resource counts of one construction at precision `g`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_resource_tally(variant: GlVariant, g: size_t, out: *mut GlTally) -> GlStatus {
    guard(|| {
        let v = match variant {
            GlVariant::SandersV1 => Variant::SandersV1,
            GlVariant::SandersV2 => Variant::SandersV2,
            GlVariant::OursV1 => Variant::OursV1,
            GlVariant::OursV2 => Variant::OursV2,
        };
        let t = lift(tally_variant(v, g))?;
        let tally = GlTally {
            toffoli: t.toffoli,
            toffoli_bound: t.toffoli_bound.unwrap_or(0),
            sqrt_swap: t.sqrt_swap,
            t_gates: t.t_gates,
            cnot: t.cnot,
            ancillas: t.ancillas,
        };
        write_out(out, tally, "out")
    })
}
