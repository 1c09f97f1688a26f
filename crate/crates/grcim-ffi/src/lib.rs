//! C ABI over the `grcim` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` style
//! functions and released with the matching `*_free`. Fallible calls return a
//! [`GrcimStatus`] and write results through out-pointers; the message of the
//! most recent failure on the calling thread is available from
//! [`grcim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grcim::circuit::{effective_gain, size_coupling_caps_with, CouplingNetwork, StageConvention};
use grcim::formats::{format_sqnr_db, round_to};
use grcim::mac::{quantize_all, simulate};
use grcim::{ArchConfig, Error, FpFormat, Granularity, MacTrace};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrcimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Config = 4,
    RangeViolation = 5,
    Unsatisfiable = 6,
    Circuit = 7,
    Panic = 8,
}

impl From<&Error> for GrcimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Format(_) => GrcimStatus::Format,
            Error::RangeViolation { .. } => GrcimStatus::RangeViolation,
            Error::Unsatisfiable(_) => GrcimStatus::Unsatisfiable,
            Error::Circuit(_) => GrcimStatus::Circuit,
            Error::Config(_) => GrcimStatus::Config,
            Error::NonFinite(_) | Error::Distribution(_) | Error::LengthMismatch(..) | Error::Empty => {
                GrcimStatus::InvalidArgument
            }
        }
    }
}

/// MAC architecture selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrcimArch {
    Conventional = 0,
    GainRangingUnit = 1,
    GainRangingRow = 2,
    GainRangingIntWeights = 3,
}

/// Stage capacitance used when sizing coupling capacitors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrcimStage {
    Extended = 0,
    Mantissa = 1,
}

/// Opaque minifloat format.
pub struct GrcimFormat(FpFormat);

/// Opaque coupling-capacitor network.
pub struct GrcimNetwork(CouplingNetwork);

/// Opaque MAC result.
pub struct GrcimTrace(MacTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (GrcimStatus, String)>) -> GrcimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GrcimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GrcimStatus::Panic
        }
    }
}

fn lib(e: Error) -> (GrcimStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (GrcimStatus, String) {
    (GrcimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GrcimStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (GrcimStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next call into this library on the
/// same thread. Do not free it.
#[no_mangle]
pub extern "C" fn grcim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn grcim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a format with `n_e` exponent and `n_m` stored mantissa bits.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_new(n_e: u32, n_m: u32, out: *mut *mut GrcimFormat) -> GrcimStatus {
    guard(|| {
        let f = FpFormat::new(n_e, n_m).map_err(lib)?;
        write(out, Box::into_raw(Box::new(GrcimFormat(f))), "out")
    })
}

/// Parses a literal such as `"E2M1"`.
///
/// # Safety
/// `literal` must be a valid NUL-terminated string and `out` valid for
/// writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_parse(literal: *const c_char, out: *mut *mut GrcimFormat) -> GrcimStatus {
    guard(|| {
        if literal.is_null() {
            return Err(null("literal"));
        }
        let s = CStr::from_ptr(literal)
            .to_str()
            .map_err(|_| (GrcimStatus::InvalidArgument, "literal is not UTF-8".to_string()))?;
        let f: FpFormat = s.parse().map_err(lib)?;
        write(out, Box::into_raw(Box::new(GrcimFormat(f))), "out")
    })
}

/// Releases a format. Null is ignored.
///
/// # Safety
/// `fmt` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_free(fmt: *mut GrcimFormat) {
    if !fmt.is_null() {
        drop(Box::from_raw(fmt));
    }
}

/// Exponent and stored mantissa widths.
///
/// # Safety
/// `fmt` must be a live handle; `n_e` and `n_m` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_bits(fmt: *const GrcimFormat, n_e: *mut u32, n_m: *mut u32) -> GrcimStatus {
    guard(|| {
        let f = deref(fmt, "fmt")?.0;
        write(n_e, f.n_e, "n_e")?;
        write(n_m, f.n_m, "n_m")
    })
}

/// Rounds `x` to the nearest representable value (ties to even, saturating).
///
/// # Safety
/// `fmt` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_round(fmt: *const GrcimFormat, x: f64, out: *mut f64) -> GrcimStatus {
    guard(|| {
        let f = deref(fmt, "fmt")?.0;
        write(out, round_to(x, f).map_err(lib)?, "out")
    })
}

/// Analytic quantization SQNR of the format in dB; NaN for a null handle.
///
/// # Safety
/// `fmt` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn grcim_format_sqnr_db(fmt: *const GrcimFormat) -> f64 {
    fmt.as_ref().map_or(f64::NAN, |f| format_sqnr_db(f.0))
}

/// Sizes exponent-selected coupling capacitors with parasitic compensation.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn grcim_network_new(
    n_m_w: u32,
    e_max: u32,
    c_u: f64,
    c_p1: f64,
    stage: GrcimStage,
    out: *mut *mut GrcimNetwork,
) -> GrcimStatus {
    guard(|| {
        let stage = match stage {
            GrcimStage::Extended => StageConvention::Extended,
            GrcimStage::Mantissa => StageConvention::Mantissa,
        };
        let net = size_coupling_caps_with(n_m_w, e_max, c_u, c_p1, stage).map_err(lib)?;
        write(out, Box::into_raw(Box::new(GrcimNetwork(net))), "out")
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn grcim_network_free(net: *mut GrcimNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Coupling capacitor for exponent `e_j`; infinity marks the direct
/// connection at the top exponent.
///
/// # Safety
/// `net` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn grcim_network_capacitance(net: *const GrcimNetwork, e_j: u32, out: *mut f64) -> GrcimStatus {
    guard(|| {
        let n = &deref(net, "net")?.0;
        let c = *n.c_e.get(e_j as usize).ok_or_else(|| {
            (
                GrcimStatus::InvalidArgument,
                format!("exponent {e_j} outside 0..={}", n.e_max),
            )
        })?;
        write(out, c, "out")
    })
}

/// Gain of exponent `e_j` relative to the direct connection, from a charge
/// conservation solve.
///
/// # Safety
/// `net` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn grcim_network_gain(net: *const GrcimNetwork, e_j: u32, out: *mut f64) -> GrcimStatus {
    guard(|| {
        let n = &deref(net, "net")?.0;
        write(out, effective_gain(n, e_j).map_err(lib)?, "out")
    })
}

/// Simulates one column dot product of `n` rows with an ideal ADC.
///
/// Inputs are quantized to the given formats first. A negative
/// `gain_range_limit` disables the span check.
///
/// # Safety
/// `x` and `w` must point to `n` readable doubles, the formats must be live
/// handles and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn grcim_mac(
    arch: GrcimArch,
    x_fmt: *const GrcimFormat,
    w_fmt: *const GrcimFormat,
    x: *const f64,
    w: *const f64,
    n: usize,
    gain_range_limit: i32,
    out: *mut *mut GrcimTrace,
) -> GrcimStatus {
    guard(|| {
        let (xf, wf) = (deref(x_fmt, "x_fmt")?.0, deref(w_fmt, "w_fmt")?.0);
        if n == 0 {
            return Err(lib(Error::Empty));
        }
        if x.is_null() || w.is_null() {
            return Err(null("x or w"));
        }
        let xs = std::slice::from_raw_parts(x, n);
        let ws = std::slice::from_raw_parts(w, n);
        let cfg = match arch {
            GrcimArch::Conventional => ArchConfig::conventional(xf, wf),
            GrcimArch::GainRangingUnit => ArchConfig::gain_ranging(Granularity::Unit, xf, wf),
            GrcimArch::GainRangingRow => ArchConfig::gain_ranging(Granularity::Row, xf, wf),
            GrcimArch::GainRangingIntWeights => ArchConfig::gain_ranging(Granularity::IntWeights, xf, wf),
        }
        .with_rows(n)
        .with_limit(u32::try_from(gain_range_limit).ok());
        let xq = quantize_all(xs, xf).map_err(lib)?;
        let wq = quantize_all(ws, wf).map_err(lib)?;
        let trace = simulate(&xq, &wq, &cfg).map_err(lib)?;
        write(out, Box::into_raw(Box::new(GrcimTrace(trace))), "out")
    })
}

/// Releases a trace. Null is ignored.
///
/// # Safety
/// `trace` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn grcim_trace_free(trace: *mut GrcimTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Normalized column voltage seen by the ADC; NaN for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn grcim_trace_z_analog(trace: *const GrcimTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.0.z_analog)
}

/// Reconstructed dot product divided by the row count; NaN for null.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn grcim_trace_z_digital(trace: *const GrcimTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.0.z_digital)
}

/// Effective number of contributors; NaN for null.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn grcim_trace_n_eff(trace: *const GrcimTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.0.n_eff)
}

/// Smallest ENOB keeping ADC noise 6 dB under `target_db` for mean signal
/// power `p_z` on full scale +-1.
#[no_mangle]
pub extern "C" fn grcim_enob_for(p_z: f64, target_db: f64) -> f64 {
    grcim::adcspec::enob_for(p_z, target_db)
}
