//! C ABI over `edm-locate`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`LocStatus`]; on failure a message for the calling thread is available
//! from [`loc_last_error_message`]. Panics never unwind into C.
//!
//! Matrices are dense row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use edm_locate::instance::points_from_rows;
use edm_locate::{exposing_vector, locate, Error, FaceCertificate, Instance, Solution, SolverConfig};
use nalgebra::DVector;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooFewAnchors = 3,
    DimensionMismatch = 4,
    NumericalFailure = 5,
    Parse = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

/// Solver parameters. Start from [`loc_solver_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocSolverConfig {
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub rank: usize,
}

/// Scalar results of a solve. `err` and `c_re` are NaN when the instance
/// carries no true source.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocSummary {
    pub err: f64,
    pub c_re: f64,
    pub eigenratio: f64,
    pub f: f64,
    pub g: f64,
    pub runtime_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A localization problem built from anchors and measured ranges.
pub struct LocInstance(Instance);

/// Exposing vector of the anchor face.
pub struct LocCertificate(FaceCertificate);

/// Solver output together with the recovered source.
pub struct LocSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> LocStatus {
    match err {
        Error::TooFewAnchors { .. } => LocStatus::TooFewAnchors,
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } => LocStatus::DimensionMismatch,
        Error::SmallDenominator(_) | Error::NonFinite { .. } | Error::InconsistentCertificate(_) => {
            LocStatus::NumericalFailure
        }
        Error::Json(_) | Error::Parse(_) => LocStatus::Parse,
        _ => LocStatus::InvalidArgument,
    }
}

/// Runs `body` behind `catch_unwind` and turns its outcome into a status.
fn guard(body: impl FnOnce() -> Result<(), (LocStatus, String)>) -> LocStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LocStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            LocStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (LocStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LocStatus, String) {
    (LocStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LocStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (LocStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), (LocStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < values.len() {
        return Err((
            LocStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length plus one,
/// or 0 when there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn loc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn loc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an instance from `n` anchors in `r` dimensions (`anchors` is
/// `n × r` row-major) and `n` measured ranges. `true_source` may be null;
/// otherwise it holds `r` values and enables the error metrics.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loc_instance_new(
    anchors: *const f64,
    n: usize,
    r: usize,
    ranges: *const f64,
    true_source: *const f64,
    out: *mut *mut LocInstance,
) -> LocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let count = n
            .checked_mul(r)
            .ok_or_else(|| (LocStatus::InvalidArgument, "n * r overflows".to_string()))?;
        let flat = input(anchors, count, "anchors")?;
        let ranges = input(ranges, n, "ranges")?;
        let rows: Vec<Vec<f64>> = flat.chunks(r.max(1)).map(<[f64]>::to_vec).collect();
        let points = points_from_rows(&rows, r).map_err(lib_err)?;
        let truth = if true_source.is_null() {
            None
        } else {
            Some(DVector::from_column_slice(input(true_source, r, "true_source")?))
        };
        let inst = Instance::from_distances(points, ranges, r, truth).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LocInstance(inst)));
        Ok(())
    })
}

/// Parses an instance from JSON with fields `r`, `anchors`, `delta` and
/// optional `true_source`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loc_instance_from_json(json: *const c_char, out: *mut *mut LocInstance) -> LocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (LocStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let inst = Instance::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LocInstance(inst)));
        Ok(())
    })
}

/// Number of anchors, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn loc_instance_anchor_count(inst: *const LocInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// # Safety
/// `inst` must be null or a handle from `loc_instance_new` /
/// `loc_instance_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn loc_instance_free(inst: *mut LocInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Computes the exposing vector for the instance's anchors.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loc_certificate_new(inst: *const LocInstance, out: *mut *mut LocCertificate) -> LocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = &as_ref(inst, "instance")?.0;
        let cert = exposing_vector(inst.anchors(), inst.r()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LocCertificate(cert)));
        Ok(())
    })
}

/// Side length of `H` (`n + 1`), or 0 for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn loc_certificate_dim(cert: *const LocCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.dim())
}

/// Dimension of the Gale space, `n − 1 − rank`.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn loc_certificate_gale_dim(cert: *const LocCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.gale_dim)
}

/// Writes `H` row-major into `out`, which must hold `dim²` values.
///
/// # Safety
/// `cert` must be a live handle; `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn loc_certificate_h(cert: *const LocCertificate, out: *mut f64, len: usize) -> LocStatus {
    guard(|| {
        let cert = &as_ref(cert, "certificate")?.0;
        let flat: Vec<f64> = cert.h.to_rows().concat();
        copy_out(&flat, out, len)
    })
}

/// # Safety
/// `cert` must be null or a handle from `loc_certificate_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn loc_certificate_free(cert: *mut LocCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Default parameters for embedding dimension `rank`.
#[no_mangle]
pub extern "C" fn loc_solver_config_default(rank: usize) -> LocSolverConfig {
    let cfg = SolverConfig::new(rank);
    LocSolverConfig {
        rho: cfg.rho,
        tol: cfg.f_prog_tol,
        max_iter: cfg.max_iter,
        rank: cfg.rank,
    }
}

/// Runs the full pipeline. A null `cfg` means the defaults for the
/// instance's dimension.
///
/// # Safety
/// `inst` must be a live handle and `out` writable; `cfg` may be null.
#[no_mangle]
pub unsafe extern "C" fn loc_solve(
    inst: *const LocInstance,
    cfg: *const LocSolverConfig,
    out: *mut *mut LocSolution,
) -> LocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = &as_ref(inst, "instance")?.0;
        let cfg = match cfg.as_ref() {
            Some(c) => SolverConfig {
                rho: c.rho,
                f_prog_tol: c.tol,
                max_iter: c.max_iter,
                rank: c.rank,
            },
            None => SolverConfig::new(inst.r()),
        };
        let sol = locate(inst, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LocSolution(sol)));
        Ok(())
    })
}

/// Recovered source coordinates; `out` must hold `r` values.
///
/// # Safety
/// `sol` must be a live handle; `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn loc_solution_source(sol: *const LocSolution, out: *mut f64, len: usize) -> LocStatus {
    guard(|| {
        let sol = &as_ref(sol, "solution")?.0;
        copy_out(&sol.report.estimated_source, out, len)
    })
}

/// Final matrix `D` row-major; `out` must hold `(n + 1)²` values.
///
/// # Safety
/// `sol` must be a live handle; `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn loc_solution_matrix(sol: *const LocSolution, out: *mut f64, len: usize) -> LocStatus {
    guard(|| {
        let sol = &as_ref(sol, "solution")?.0;
        copy_out(&sol.d.to_rows().concat(), out, len)
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loc_solution_summary(sol: *const LocSolution, out: *mut LocSummary) -> LocStatus {
    guard(|| {
        let sol = &as_ref(sol, "solution")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = &sol.report;
        *out = LocSummary {
            err: r.err.unwrap_or(f64::NAN),
            c_re: r.c_re.unwrap_or(f64::NAN),
            eigenratio: r.eigenratio,
            f: r.f,
            g: r.g,
            runtime_seconds: r.runtime_seconds,
            iterations: r.iterations,
            converged: r.converged,
        };
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from `loc_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn loc_solution_free(sol: *mut LocSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping() {
        assert_eq!(
            status_of(&Error::TooFewAnchors { needed: 3, got: 2, r: 2 }),
            LocStatus::TooFewAnchors
        );
        assert_eq!(status_of(&Error::SmallDenominator(0.0)), LocStatus::NumericalFailure);
        assert_eq!(status_of(&Error::Parse("x".into())), LocStatus::Parse);
    }

    #[test]
    fn panics_are_contained() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, LocStatus::Panic);
        let mut buf = [0 as c_char; 64];
        let n = unsafe { loc_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn success_clears_message() {
        set_last_error("old");
        assert_eq!(guard(|| Ok(())), LocStatus::Ok);
        assert_eq!(unsafe { loc_last_error_message(ptr::null_mut(), 0) }, 0);
    }
}
