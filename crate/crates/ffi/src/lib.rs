//! C ABI over the `pathsig` core.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`PsStatus`]; on failure the message is kept per thread and can be read
//! with [`ps_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pathsig::leadlag::{lead_matrix, signed_area};
use pathsig::signature::{log_signature, signature};
use pathsig::{Error, Path, TruncatedTensor, Word};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Domain = 4,
    InvalidPath = 5,
    Parse = 6,
    BufferTooSmall = 7,
    Compute = 8,
    Panic = 9,
}

/// A sampled path.
pub struct PsPath(Path);

/// A truncated tensor, e.g. a signature.
pub struct PsTensor(TruncatedTensor);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> PsStatus {
    match e {
        Error::Dimension(_) => PsStatus::Dimension,
        Error::Domain(_) => PsStatus::Domain,
        Error::InvalidPath(_) => PsStatus::InvalidPath,
        Error::InvalidArgument(_) | Error::WordTooLong { .. } | Error::Unsupported(_) => PsStatus::InvalidArgument,
        Error::Csv { .. } | Error::CsvFormat(_) | Error::Json(_) => PsStatus::Parse,
        _ => PsStatus::Compute,
    }
}

fn fail(status: PsStatus, msg: impl Into<String>) -> PsStatus {
    set_error(msg);
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PsStatus>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PsStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: pathsig::Result<T>) -> Result<T, PsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, PsStatus> {
    p.as_ref().ok_or_else(|| fail(PsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], PsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn check_out<T>(out: *mut T) -> Result<(), PsStatus> {
    if out.is_null() {
        Err(fail(PsStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a path from `samples` strictly increasing `times` and row-major
/// `values` of `samples * channels` entries.
///
/// # Safety
/// `times` and `values` must point to arrays of the stated lengths and `out`
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ps_path_new(
    times: *const f64,
    values: *const f64,
    samples: usize,
    channels: usize,
    out: *mut *mut PsPath,
) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let total = samples
            .checked_mul(channels)
            .ok_or_else(|| fail(PsStatus::InvalidArgument, "samples * channels overflows"))?;
        let t = slice(times, samples, "times")?.to_vec();
        let v = slice(values, total, "values")?.to_vec();
        let p = lift(Path::from_flat(t, v, channels, Vec::new()))?;
        *out = Box::into_raw(Box::new(PsPath(p)));
        Ok(())
    })
}

/// Parses CSV text (header row, time in the first column) into a path.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_path_from_csv(csv: *const c_char, out: *mut *mut PsPath) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let text = handle(csv, "csv")?;
        let bytes = CStr::from_ptr(text).to_bytes();
        let p = lift(pathsig::io::load_csv(bytes))?;
        *out = Box::into_raw(Box::new(PsPath(p)));
        Ok(())
    })
}

/// # Safety
/// `path` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_path_free(path: *mut PsPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_path_len(path: *const PsPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// Number of channels, or 0 for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_path_channels(path: *const PsPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.channels())
}

/// Truncated signature at `level`.
///
/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_signature(path: *const PsPath, level: usize, out: *mut *mut PsTensor) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let p = handle(path, "path")?;
        let s = lift(signature(&p.0, level))?;
        *out = Box::into_raw(Box::new(PsTensor(s.tensor)));
        Ok(())
    })
}

/// Truncated log-signature at `level`.
///
/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_log_signature(path: *const PsPath, level: usize, out: *mut *mut PsTensor) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let p = handle(path, "path")?;
        let t = lift(log_signature(&p.0, level))?;
        *out = Box::into_raw(Box::new(PsTensor(t)));
        Ok(())
    })
}

/// # Safety
/// `tensor` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_free(tensor: *mut PsTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Truncation level, or 0 for NULL.
///
/// # Safety
/// `tensor` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_level(tensor: *const PsTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.0.level())
}

/// Alphabet size, or 0 for NULL.
///
/// # Safety
/// `tensor` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_alphabet_size(tensor: *const PsTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.0.alphabet_size())
}

/// Coefficient of the word `letters[0..len]` (1-based letters; `len = 0`
/// gives the constant term).
///
/// # Safety
/// `tensor` must be a live handle, `letters` must hold `len` entries and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_coeff(
    tensor: *const PsTensor,
    letters: *const usize,
    len: usize,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let t = handle(tensor, "tensor")?;
        let word = if len == 0 {
            Word::empty()
        } else {
            if letters.is_null() {
                return Err(fail(PsStatus::NullPointer, "letters is null"));
            }
            lift(Word::new(std::slice::from_raw_parts(letters, len).to_vec()))?
        };
        match t.0.coeff(&word) {
            Some(v) => {
                *out = v;
                Ok(())
            }
            None => Err(fail(
                PsStatus::InvalidArgument,
                format!("word {word} is outside the alphabet or truncation level"),
            )),
        }
    })
}

/// Copies grade `k` (`N^k` entries, lexicographic word order) into `buf`.
/// `needed` receives the grade size; with too small a buffer nothing is
/// copied and `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `tensor` must be a live handle, `buf` must hold `buf_len` entries (or be
/// NULL when `buf_len` is 0) and `needed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_grade(
    tensor: *const PsTensor,
    k: usize,
    buf: *mut f64,
    buf_len: usize,
    needed: *mut usize,
) -> PsStatus {
    guard(|| {
        check_out(needed)?;
        let t = handle(tensor, "tensor")?;
        if k > t.0.level() {
            return Err(fail(
                PsStatus::InvalidArgument,
                format!("grade {k} above truncation level {}", t.0.level()),
            ));
        }
        let g = t.0.grade(k);
        *needed = g.len();
        if buf_len < g.len() {
            return Err(fail(PsStatus::BufferTooSmall, format!("grade needs {} entries", g.len())));
        }
        if buf.is_null() {
            return Err(fail(PsStatus::NullPointer, "buf is null"));
        }
        ptr::copy_nonoverlapping(g.as_ptr(), buf, g.len());
        Ok(())
    })
}

/// Serializes the tensor as JSON `{"N":..,"L":..,"levels":[..]}` into a new
/// string, released with [`ps_string_free`].
///
/// # Safety
/// `tensor` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_tensor_to_json(tensor: *const PsTensor, out: *mut *mut c_char) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let t = handle(tensor, "tensor")?;
        let s = lift(serde_json::to_string(&t.0).map_err(Error::from))?;
        *out = CString::new(s).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Signed area between 0-based channels `i` and `j`.
///
/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_signed_area(path: *const PsPath, i: usize, j: usize, out: *mut f64) -> PsStatus {
    guard(|| {
        check_out(out)?;
        let p = handle(path, "path")?;
        *out = lift(signed_area(&p.0, i, j))?;
        Ok(())
    })
}

/// Writes the `N x N` lead matrix row-major into `buf`. `needed` receives
/// `N * N`; with too small a buffer nothing is copied.
///
/// # Safety
/// `path` must be a live handle, `buf` must hold `buf_len` entries (or be
/// NULL when `buf_len` is 0) and `needed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_lead_matrix(
    path: *const PsPath,
    buf: *mut f64,
    buf_len: usize,
    needed: *mut usize,
) -> PsStatus {
    guard(|| {
        check_out(needed)?;
        let p = handle(path, "path")?;
        let n = p.0.channels();
        *needed = n * n;
        if buf_len < n * n {
            return Err(fail(PsStatus::BufferTooSmall, format!("lead matrix needs {} entries", n * n)));
        }
        if buf.is_null() {
            return Err(fail(PsStatus::NullPointer, "buf is null"));
        }
        let m = lead_matrix(&p.0);
        for (r, row) in m.entries.iter().enumerate() {
            ptr::copy_nonoverlapping(row.as_ptr(), buf.add(r * n), n);
        }
        Ok(())
    })
}
