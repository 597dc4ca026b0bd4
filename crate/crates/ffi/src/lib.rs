//! C ABI over `ap3-core`.
//!
//! Objects are opaque handles created by `ap3_*_new` / `ap3_*_load` and
//! released with the matching `ap3_*_free`. Every fallible call returns an
//! [`Ap3Status`]; on failure `ap3_last_error_message` describes the error for
//! the calling thread. Strings returned through out-pointers are owned by the
//! caller and must be released with `ap3_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ap3_core::apcount;
use ap3_core::fourier;
use ap3_core::improve::{construct_g, ImprovePipelineConfig};
use ap3_core::rounding::round_to_indicator;
use ap3_core::subspace::{average_over_cosets, parse_generators};
use ap3_core::{DensityFunction, Error, GroupParams, PointSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ap3Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    /// Bad group parameters, out-of-range values or mismatched sizes.
    Domain = 5,
    /// The improvement pipeline could not run with the given parameters.
    Pipeline = 6,
    Internal = 7,
}

/// A density function `f: F_p^n → [0, 1]`.
pub struct Ap3Density {
    inner: DensityFunction,
}

/// A subset of `F_p^n`.
pub struct Ap3PointSet {
    inner: PointSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> Ap3Status {
    match error {
        Error::Io { .. } => Ap3Status::Io,
        Error::Parse { .. } => Ap3Status::Parse,
        Error::InvalidArgument(_) => Ap3Status::InvalidArgument,
        Error::InsufficientDimension { .. } | Error::NotCosetConstant(_) => Ap3Status::Pipeline,
        Error::Consistency(_) | Error::ImaginaryResidue { .. } => Ap3Status::Internal,
        _ => Ap3Status::Domain,
    }
}

struct Failure(Ap3Status, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> Ap3Status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => Ap3Status::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            Ap3Status::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(Ap3Status::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn string_arg(ptr: *const c_char, what: &str) -> Result<String, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(Ap3Status::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

fn group(p: u32, n: u32) -> Result<GroupParams, Failure> {
    Ok(GroupParams::new(p, n)?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ap3_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ap3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a density from `p^n` values in canonical index order.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out_density` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_new(
    p: u32,
    n: u32,
    values: *const f64,
    len: usize,
    out_density: *mut *mut Ap3Density,
) -> Ap3Status {
    guard(|| {
        let slot = out(out_density, "out_density")?;
        let params = group(p, n)?;
        if values.is_null() {
            return Err(null("values"));
        }
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let inner = DensityFunction::new(params, values)?;
        *slot = Box::into_raw(Box::new(Ap3Density { inner }));
        Ok(())
    })
}

/// Reads an `.apf` file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out_density` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_load(path: *const c_char, out_density: *mut *mut Ap3Density) -> Ap3Status {
    guard(|| {
        let slot = out(out_density, "out_density")?;
        let path = string_arg(path, "path")?;
        let inner = DensityFunction::load(&path)?;
        *slot = Box::into_raw(Box::new(Ap3Density { inner }));
        Ok(())
    })
}

/// Writes an `.apf` file.
///
/// # Safety
/// `density` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_save(density: *const Ap3Density, path: *const c_char) -> Ap3Status {
    guard(|| {
        let d = borrow(density, "density")?;
        let path = string_arg(path, "path")?;
        d.inner.save(&path)?;
        Ok(())
    })
}

/// # Safety
/// `density` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_free(density: *mut Ap3Density) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Number of points `p^n`.
///
/// # Safety
/// `density` must be a live handle and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_len(density: *const Ap3Density, out_len: *mut usize) -> Ap3Status {
    guard(|| {
        *out(out_len, "out_len")? = borrow(density, "density")?.inner.params().size();
        Ok(())
    })
}

/// Copies the values into `buffer`, which must hold exactly `p^n` doubles.
///
/// # Safety
/// `buffer` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_values(density: *const Ap3Density, buffer: *mut f64, len: usize) -> Ap3Status {
    guard(|| {
        let d = borrow(density, "density")?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let values = d.inner.values();
        if len != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                found: len,
            }
            .into());
        }
        std::slice::from_raw_parts_mut(buffer, len).copy_from_slice(values);
        Ok(())
    })
}

/// # Safety
/// `density` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_expectation(density: *const Ap3Density, out_value: *mut f64) -> Ap3Status {
    guard(|| {
        *out(out_value, "out_value")? = borrow(density, "density")?.inner.expectation();
        Ok(())
    })
}

/// `Λ₃` by the direct double sum.
///
/// # Safety
/// `density` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_lambda3_direct(density: *const Ap3Density, out_value: *mut f64) -> Ap3Status {
    guard(|| {
        *out(out_value, "out_value")? = apcount::lambda3_direct(&borrow(density, "density")?.inner);
        Ok(())
    })
}

/// `Λ₃` through the Fourier transform.
///
/// # Safety
/// `density` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_lambda3_spectral(density: *const Ap3Density, out_value: *mut f64) -> Ap3Status {
    guard(|| {
        *out(out_value, "out_value")? = fourier::lambda3_spectral(&borrow(density, "density")?.inner)?;
        Ok(())
    })
}

/// Averages over the cosets of the subspace spanned by `generators`
/// (for example `"1,0;0,1"`, `"full"` or `"zero"`).
///
/// # Safety
/// `density` must be a live handle, `generators` a nul-terminated string and
/// `out_density` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_density_average(
    density: *const Ap3Density,
    generators: *const c_char,
    out_density: *mut *mut Ap3Density,
) -> Ap3Status {
    guard(|| {
        let slot = out(out_density, "out_density")?;
        let d = borrow(density, "density")?;
        let w = parse_generators(d.inner.params(), &string_arg(generators, "generators")?)?;
        let inner = average_over_cosets(&d.inner, &w)?;
        *slot = Box::into_raw(Box::new(Ap3Density { inner }));
        Ok(())
    })
}

/// Builds `g` from `f`. `delta <= 0` uses the default `Δ(ε)`; `ell == 0`
/// uses the default codimension. The report is written as JSON to
/// `out_report_json` when that pointer is non-null.
///
/// # Safety
/// `density` must be a live handle; `out_g` must be writable;
/// `out_report_json` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_improve(
    density: *const Ap3Density,
    epsilon: f64,
    delta: f64,
    ell: usize,
    out_g: *mut *mut Ap3Density,
    out_report_json: *mut *mut c_char,
) -> Ap3Status {
    guard(|| {
        let slot = out(out_g, "out_g")?;
        let f = borrow(density, "density")?;
        let mut config = ImprovePipelineConfig::new(epsilon);
        if delta > 0.0 {
            config = config.with_delta(delta);
        }
        if ell > 0 {
            config = config.with_ell(ell);
        }
        let (g, report) = construct_g(&f.inner, &config)?;
        if let Some(json) = out_report_json.as_mut() {
            *json = into_c_string(serde_json::to_string(&report).expect("report serializes"));
        }
        *slot = Box::into_raw(Box::new(Ap3Density { inner: g }));
        Ok(())
    })
}

/// Rounds to an indicator with mean at least `E(j)`.
///
/// # Safety
/// `density` must be a live handle; `out_set` must be writable;
/// `out_report_json` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_round(
    density: *const Ap3Density,
    seed: u64,
    out_set: *mut *mut Ap3PointSet,
    out_report_json: *mut *mut c_char,
) -> Ap3Status {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        let j = borrow(density, "density")?;
        let (j2, report) = round_to_indicator(&j.inner, seed, &[])?;
        let inner = j2.support().expect("rounding yields an indicator");
        if let Some(json) = out_report_json.as_mut() {
            *json = into_c_string(serde_json::to_string(&report).expect("report serializes"));
        }
        *slot = Box::into_raw(Box::new(Ap3PointSet { inner }));
        Ok(())
    })
}

/// Builds a set from member indices, in any order, duplicates allowed.
///
/// # Safety
/// `members` must point to `len` readable indices (may be null when `len`
/// is 0); `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_set_new(
    p: u32,
    n: u32,
    members: *const usize,
    len: usize,
    out_set: *mut *mut Ap3PointSet,
) -> Ap3Status {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        let params = group(p, n)?;
        let members = if len == 0 {
            Vec::new()
        } else if members.is_null() {
            return Err(null("members"));
        } else {
            std::slice::from_raw_parts(members, len).to_vec()
        };
        let inner = PointSet::new(params, members)?;
        *slot = Box::into_raw(Box::new(Ap3PointSet { inner }));
        Ok(())
    })
}

/// Reads an `.aps` file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_set_load(path: *const c_char, out_set: *mut *mut Ap3PointSet) -> Ap3Status {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        let inner = PointSet::load(string_arg(path, "path")?)?;
        *slot = Box::into_raw(Box::new(Ap3PointSet { inner }));
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ap3_set_free(set: *mut Ap3PointSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be a live handle and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_set_len(set: *const Ap3PointSet, out_len: *mut usize) -> Ap3Status {
    guard(|| {
        *out(out_len, "out_len")? = borrow(set, "set")?.inner.len();
        Ok(())
    })
}

/// Number of progressions `(m, m+d, m+2d)` with `d ≠ 0` inside the set.
///
/// # Safety
/// `set` must be a live handle and `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn ap3_t3_nontrivial(set: *const Ap3PointSet, out_count: *mut u64) -> Ap3Status {
    guard(|| {
        *out(out_count, "out_count")? = apcount::t3_nontrivial(&borrow(set, "set")?.inner);
        Ok(())
    })
}
