//! C ABI over the `maclaurin` crate.
//!
//! Every fallible call returns an [`MclStatus`] and writes its result through
//! an out pointer. On failure a message is available from
//! [`mcl_last_error_message`] on the same thread. Handles are opaque and must
//! be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maclaurin::{ErrorClass, FeatureMapSpec, MaclaurinKernel, MapMode, RandomMaclaurinMap};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MclStatus {
    Ok = 0,
    /// Bad argument, kernel spec or mode.
    Usage = 1,
    /// Malformed serialized input.
    Data = 2,
    /// Outside a convergence domain or theorem regime, or a negative
    /// coefficient.
    Domain = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A dot product kernel `K(x, y) = f(<x, y>)`.
pub struct MclKernel {
    inner: MaclaurinKernel,
}

/// A sampled random Maclaurin feature map.
pub struct MclFeatureMap {
    inner: RandomMaclaurinMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MclStatus, String);

impl From<maclaurin::Error> for Failure {
    fn from(e: maclaurin::Error) -> Self {
        let status = match e.class() {
            ErrorClass::Usage => MclStatus::Usage,
            ErrorClass::Data => MclStatus::Data,
            ErrorClass::Domain => MclStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MclStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MclStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic in maclaurin".into());
            MclStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MclStatus::Usage, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn kernel_ref<'a>(k: *const MclKernel) -> Result<&'a MaclaurinKernel, Failure> {
    k.as_ref().map(|k| &k.inner).ok_or_else(|| null("kernel"))
}

unsafe fn map_ref<'a>(m: *const MclFeatureMap) -> Result<&'a RandomMaclaurinMap, Failure> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| null("feature map"))
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mcl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a kernel spec such as `poly:q=10,r=1` or `exp:sigma=0.5`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_parse(
    spec: *const c_char,
    out: *mut *mut MclKernel,
) -> MclStatus {
    guard(|| {
        let spec = str_arg(spec, "spec")?;
        let inner = maclaurin::parse_kernel_spec(spec, None)?;
        write(out, Box::into_raw(Box::new(MclKernel { inner })))
    })
}

/// # Safety
/// `kernel` must be NULL or a handle from [`mcl_kernel_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_free(kernel: *mut MclKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Maclaurin coefficient `a_n`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_coefficient(
    kernel: *const MclKernel,
    n: u32,
    out: *mut f64,
) -> MclStatus {
    guard(|| write(out, kernel_ref(kernel)?.coefficient(n)))
}

/// `f(t)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_eval(
    kernel: *const MclKernel,
    t: f64,
    out: *mut f64,
) -> MclStatus {
    guard(|| write(out, kernel_ref(kernel)?.eval_f(t)?))
}

/// `f'(t)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_eval_prime(
    kernel: *const MclKernel,
    t: f64,
    out: *mut f64,
) -> MclStatus {
    guard(|| write(out, kernel_ref(kernel)?.eval_f_prime(t)?))
}

/// `K(x, y)` for two vectors of length `len`.
///
/// # Safety
/// `x` and `y` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_kernel_value(
    kernel: *const MclKernel,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> MclStatus {
    guard(|| {
        let (x, y) = (slice_arg(x, len, "x")?, slice_arg(y, len, "y")?);
        write(out, kernel_ref(kernel)?.kernel_value(x, y)?)
    })
}

/// Smallest `D` guaranteeing sup error `eps` with probability `1 - delta` on
/// the L1 ball of radius `radius` in `input_dim` dimensions.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_recommended_d(
    kernel: *const MclKernel,
    input_dim: usize,
    radius: f64,
    eps: f64,
    delta: f64,
    p: f64,
    out: *mut u64,
) -> MclStatus {
    guard(|| {
        let report =
            maclaurin::recommended_d(kernel_ref(kernel)?, input_dim, radius, eps, delta, p)?;
        write(out, report.recommended_d)
    })
}

/// Samples a feature map. `mode` is `plain`, `h01` or `truncated:<k>`; NULL
/// means `plain`.
///
/// # Safety
/// `kernel` must be a live handle; `mode` must be NULL or a NUL-terminated
/// string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_build(
    kernel: *const MclKernel,
    input_dim: usize,
    num_features: usize,
    seed: u64,
    mode: *const c_char,
    p: f64,
    out: *mut *mut MclFeatureMap,
) -> MclStatus {
    guard(|| {
        let mode: MapMode = if mode.is_null() {
            MapMode::Plain
        } else {
            str_arg(mode, "mode")?.parse()?
        };
        let spec = FeatureMapSpec::new(input_dim, num_features)
            .with_seed(seed)
            .with_mode(mode)
            .with_p(p);
        let inner = RandomMaclaurinMap::build(kernel_ref(kernel)?, &spec)?;
        write(out, Box::into_raw(Box::new(MclFeatureMap { inner })))
    })
}

/// # Safety
/// `map` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_free(map: *mut MclFeatureMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Length of the vectors produced by [`mcl_map_apply`]; 0 for NULL.
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_output_dim(map: *const MclFeatureMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.output_dim())
}

/// Maps `x` (length `len`) into `out` (length `out_len`, which must equal
/// [`mcl_map_output_dim`]).
///
/// # Safety
/// `x` must point to `len` readable doubles and `out` to `out_len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_apply(
    map: *const MclFeatureMap,
    x: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> MclStatus {
    guard(|| {
        let map = map_ref(map)?;
        let z = map.apply(slice_arg(x, len, "x")?)?;
        if out_len != z.len() {
            return Err(Failure(
                MclStatus::Usage,
                format!(
                    "output buffer holds {out_len} values, map produces {}",
                    z.len()
                ),
            ));
        }
        if out_len > 0 {
            if out.is_null() {
                return Err(null("output buffer"));
            }
            ptr::copy_nonoverlapping(z.as_ptr(), out, out_len);
        }
        Ok(())
    })
}

/// Serializes the map to JSON. Free the string with [`mcl_string_free`].
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_to_json(
    map: *const MclFeatureMap,
    out: *mut *mut c_char,
) -> MclStatus {
    guard(|| {
        let json = map_ref(map)?.to_json()?;
        let c = CString::new(json).map_err(|e| Failure(MclStatus::Data, e.to_string()))?;
        write(out, c.into_raw())
    })
}

/// Restores a map serialized by [`mcl_map_to_json`] or the CLI.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcl_map_from_json(
    json: *const c_char,
    out: *mut *mut MclFeatureMap,
) -> MclStatus {
    guard(|| {
        let inner = RandomMaclaurinMap::from_json(str_arg(json, "json")?)?;
        write(out, Box::into_raw(Box::new(MclFeatureMap { inner })))
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
