//! C ABI for the pilotseq library: opaque handles, integer status codes, and
//! flat f64 buffers (complex values interleaved re/im, pilots column-major).
//!
//! Every fallible call returns a [`PilotseqStatus`]; on failure a
//! human-readable message is stored thread-locally and can be fetched with
//! [`pilotseq_last_error_message`]. Handles returned through out-pointers are
//! owned by the caller and must be released with the matching `_free`
//! function exactly once.
//!
//! The C header is generated into `include/pilotseq.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::path::Path;

use pilotseq::model::{
    read_set_file, write_set_file, Acceleration, Constraint, DesignProblem, InterferenceMatrix,
    OptimizerSettings, SequenceSet,
};
use pilotseq::{bounds, construct, metrics, mm};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotseqStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments violate a precondition (sizes, ranges, matrix invariants).
    InvalidArgument = 2,
    /// Buffer lengths or matrix orders do not line up.
    DimensionMismatch = 3,
    /// The interference matrix is not positive definite where required.
    NotPositiveDefinite = 4,
    /// The requested bound does not apply to these parameters.
    NotApplicable = 5,
    /// The destination buffer is too small.
    BufferTooSmall = 6,
    /// Reading or writing a file failed.
    IoError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(status: PilotseqStatus, message: impl Into<String>) -> PilotseqStatus {
    set_error(message);
    status
}

fn fail_from(e: pilotseq::Error) -> PilotseqStatus {
    let status = match e {
        pilotseq::Error::DimensionMismatch(_) => PilotseqStatus::DimensionMismatch,
        pilotseq::Error::InvalidArgument(_) => PilotseqStatus::InvalidArgument,
        pilotseq::Error::NotPositiveDefinite(_) => PilotseqStatus::NotPositiveDefinite,
    };
    fail(status, e.to_string())
}

/// Opaque pilot sequence set handle.
pub struct PilotseqSet {
    inner: SequenceSet,
}

/// Opaque optimizer trace handle.
pub struct PilotseqTrace {
    inner: mm::OptimizerTrace,
}

/// Copies the most recent error message (NUL-terminated, possibly truncated)
/// for the calling thread into `buffer` and returns the full message length
/// in bytes, excluding the NUL. A zero capacity leaves the buffer untouched.
///
/// # Safety
/// `buffer` must point to at least `capacity` writable bytes, or be null with
/// `capacity` 0.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast::<u8>(), n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pilotseq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn beta_from_raw(beta: *const f64, cells: usize) -> Result<InterferenceMatrix, PilotseqStatus> {
    if beta.is_null() {
        return Err(fail(PilotseqStatus::NullArgument, "beta pointer is null"));
    }
    if cells == 0 {
        return Err(fail(
            PilotseqStatus::InvalidArgument,
            "cell count must be positive",
        ));
    }
    let raw = std::slice::from_raw_parts(beta, cells * cells);
    let rows: Vec<Vec<f64>> = (0..cells)
        .map(|m| raw[m * cells..(m + 1) * cells].to_vec())
        .collect();
    InterferenceMatrix::from_rows(&rows).map_err(fail_from)
}

unsafe fn path_from_raw(path: *const c_char) -> Result<&'static Path, PilotseqStatus> {
    if path.is_null() {
        return Err(fail(PilotseqStatus::NullArgument, "path pointer is null"));
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail(
            PilotseqStatus::InvalidArgument,
            "path is not valid UTF-8",
        )),
    }
}

/// Creates a sequence set from interleaved complex data.
///
/// `data` holds `2 * tau * cells * users_per_cell` doubles: pilots are
/// column-major (pilot n occupies entries [2nτ, 2(n+1)τ)), each complex
/// value as re, im.
///
/// # Safety
/// `data` must point to `data_len` readable doubles; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_create(
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    data: *const f64,
    data_len: usize,
    unimodular: bool,
    out: *mut *mut PilotseqSet,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    if data.is_null() {
        return fail(PilotseqStatus::NullArgument, "data pointer is null");
    }
    let expected = 2 * tau * cells * users_per_cell;
    if data_len != expected {
        return fail(
            PilotseqStatus::DimensionMismatch,
            format!("expected {expected} doubles, got {data_len}"),
        );
    }
    let raw = std::slice::from_raw_parts(data, data_len);
    match SequenceSet::from_interleaved(tau, cells, users_per_cell, raw, unimodular) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PilotseqSet { inner: set }));
            PilotseqStatus::Ok
        }
        Err(e) => fail_from(e),
    }
}

/// Reads back the dimensions of a set.
///
/// # Safety
/// All pointers must be valid; `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_dims(
    set: *const PilotseqSet,
    tau: *mut usize,
    cells: *mut usize,
    users_per_cell: *mut usize,
) -> PilotseqStatus {
    if set.is_null() || tau.is_null() || cells.is_null() || users_per_cell.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    let inner = &(*set).inner;
    *tau = inner.tau();
    *cells = inner.cells();
    *users_per_cell = inner.users_per_cell();
    PilotseqStatus::Ok
}

/// Whether the set was flagged unimodular at creation.
///
/// # Safety
/// `set` must be a live handle; `unimodular` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_is_unimodular(
    set: *const PilotseqSet,
    unimodular: *mut bool,
) -> PilotseqStatus {
    if set.is_null() || unimodular.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    *unimodular = (*set).inner.is_unimodular_flagged();
    PilotseqStatus::Ok
}

/// Copies the pilot matrix out as interleaved doubles (see
/// [`pilotseq_set_create`] for the layout). `buffer_len` must be at least
/// `2 * tau * cells * users_per_cell`.
///
/// # Safety
/// `buffer` must point to `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_copy_data(
    set: *const PilotseqSet,
    buffer: *mut f64,
    buffer_len: usize,
) -> PilotseqStatus {
    if set.is_null() || buffer.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    let inner = &(*set).inner;
    let needed = 2 * inner.tau() * inner.total_sequences();
    if buffer_len < needed {
        return fail(
            PilotseqStatus::BufferTooSmall,
            format!("need {needed} doubles, got {buffer_len}"),
        );
    }
    let out = std::slice::from_raw_parts_mut(buffer, needed);
    out.copy_from_slice(&inner.to_interleaved());
    PilotseqStatus::Ok
}

/// Releases a set handle. Null is a no-op.
///
/// # Safety
/// `set` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_free(set: *mut PilotseqSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Writes a set to a JSON sequence-set file.
///
/// # Safety
/// `set` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_write_file(
    set: *const PilotseqSet,
    path: *const c_char,
) -> PilotseqStatus {
    if set.is_null() {
        return fail(PilotseqStatus::NullArgument, "set pointer is null");
    }
    let path = match path_from_raw(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match write_set_file(&(*set).inner, path) {
        Ok(()) => PilotseqStatus::Ok,
        Err(e) => fail(PilotseqStatus::IoError, e.to_string()),
    }
}

/// Reads a JSON sequence-set file into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_set_read_file(
    path: *const c_char,
    out: *mut *mut PilotseqSet,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    let path = match path_from_raw(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match read_set_file(path) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PilotseqSet { inner: set }));
            PilotseqStatus::Ok
        }
        Err(e @ pilotseq::model::FileError::Io { .. }) => {
            fail(PilotseqStatus::IoError, e.to_string())
        }
        Err(e) => fail(PilotseqStatus::InvalidArgument, e.to_string()),
    }
}

/// Builds the bound-achieving multi-cell set (K ≥ τ, positive definite B;
/// `beta` is the row-major J×J interference matrix).
///
/// # Safety
/// `beta` must point to `cells * cells` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_construct_optimal(
    tau: usize,
    users_per_cell: usize,
    cells: usize,
    beta: *const f64,
    out: *mut *mut PilotseqSet,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    let b = match beta_from_raw(beta, cells) {
        Ok(b) => b,
        Err(status) => return status,
    };
    match construct::optimal_multi_cell(tau, users_per_cell, &b) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PilotseqSet { inner: set }));
            PilotseqStatus::Ok
        }
        Err(e) => fail_from(e),
    }
}

/// Runs the ETSC-MM optimizer and returns the designed set plus its trace.
///
/// # Safety
/// `beta` must point to `cells * cells` doubles; `out_set` and `out_trace`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_design(
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    beta: *const f64,
    unimodular: bool,
    accelerate: bool,
    max_iterations: usize,
    epsilon: f64,
    seed: u64,
    out_set: *mut *mut PilotseqSet,
    out_trace: *mut *mut PilotseqTrace,
) -> PilotseqStatus {
    if out_set.is_null() || out_trace.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    let b = match beta_from_raw(beta, cells) {
        Ok(b) => b,
        Err(status) => return status,
    };
    let problem = match DesignProblem::new(
        tau,
        cells,
        users_per_cell,
        b,
        if unimodular {
            Constraint::Unimodular
        } else {
            Constraint::UnitNorm
        },
        OptimizerSettings {
            max_iterations,
            epsilon,
            seed,
            acceleration: if accelerate {
                Acceleration::Squarem
            } else {
                Acceleration::Plain
            },
        },
    ) {
        Ok(p) => p,
        Err(e) => return fail_from(e),
    };
    match mm::solve(&problem) {
        Ok((set, trace)) => {
            *out_set = Box::into_raw(Box::new(PilotseqSet { inner: set }));
            *out_trace = Box::into_raw(Box::new(PilotseqTrace { inner: trace }));
            PilotseqStatus::Ok
        }
        Err(e) => fail_from(e),
    }
}

/// Number of recorded objective values (iterations + 1; entry 0 is the
/// initial objective).
///
/// # Safety
/// `trace` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_trace_len(
    trace: *const PilotseqTrace,
    len: *mut usize,
) -> PilotseqStatus {
    if trace.is_null() || len.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    *len = (*trace).inner.objectives.len();
    PilotseqStatus::Ok
}

/// Copies the per-iteration ETSC values.
///
/// # Safety
/// `buffer` must point to `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_trace_objectives(
    trace: *const PilotseqTrace,
    buffer: *mut f64,
    buffer_len: usize,
) -> PilotseqStatus {
    if trace.is_null() || buffer.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    let objectives = &(*trace).inner.objectives;
    if buffer_len < objectives.len() {
        return fail(
            PilotseqStatus::BufferTooSmall,
            format!("need {} doubles, got {buffer_len}", objectives.len()),
        );
    }
    std::ptr::copy_nonoverlapping(objectives.as_ptr(), buffer, objectives.len());
    PilotseqStatus::Ok
}

/// Releases a trace handle. Null is a no-op.
///
/// # Safety
/// `trace` must have been produced by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_trace_free(trace: *mut PilotseqTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// ETSC of a set under the row-major J×J interference matrix `beta`.
///
/// # Safety
/// `set` must be a live handle; `beta` must hold `cells²` doubles matching
/// the set's cell count; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_etsc(
    set: *const PilotseqSet,
    beta: *const f64,
    out: *mut f64,
) -> PilotseqStatus {
    if set.is_null() || out.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    let inner = &(*set).inner;
    let b = match beta_from_raw(beta, inner.cells()) {
        Ok(b) => b,
        Err(status) => return status,
    };
    match metrics::etsc(inner, &b) {
        Ok(v) => {
            *out = v;
            PilotseqStatus::Ok
        }
        Err(e) => fail_from(e),
    }
}

/// TSC of a set (all weights 1).
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_tsc(set: *const PilotseqSet, out: *mut f64) -> PilotseqStatus {
    if set.is_null() || out.is_null() {
        return fail(PilotseqStatus::NullArgument, "null pointer argument");
    }
    *out = metrics::tsc(&(*set).inner);
    PilotseqStatus::Ok
}

/// Classical Welch bound N²/τ with N = cells · users.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_welch_bound(
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    out: *mut f64,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    if tau == 0 || cells == 0 || users_per_cell == 0 {
        return fail(PilotseqStatus::InvalidArgument, "dimensions must be positive");
    }
    *out = bounds::welch_bound(tau, cells, users_per_cell);
    PilotseqStatus::Ok
}

/// Two-cell extended Welch bound 2K²(1+β)/(K+β(τ−K)); `NotApplicable`
/// outside K ≤ τ ≤ 2K.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_two_cell_bound(
    tau: usize,
    users_per_cell: usize,
    beta: f64,
    out: *mut f64,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    if !(0.0..=1.0).contains(&beta) {
        return fail(PilotseqStatus::InvalidArgument, "beta must lie in [0,1]");
    }
    match bounds::extended_welch_bound_two_cell(tau, users_per_cell, beta) {
        Some(v) => {
            *out = v;
            PilotseqStatus::Ok
        }
        None => fail(
            PilotseqStatus::NotApplicable,
            format!("requires K <= tau <= 2K, got K = {users_per_cell}, tau = {tau}"),
        ),
    }
}

/// K ≥ τ extended bound (K²/τ)·Σβ; `NotApplicable` when K < τ and
/// `NotPositiveDefinite` when B fails the eigenvalue test.
///
/// # Safety
/// `beta` must point to `cells * cells` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilotseq_new_extended_bound(
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    beta: *const f64,
    out: *mut f64,
) -> PilotseqStatus {
    if out.is_null() {
        return fail(PilotseqStatus::NullArgument, "out pointer is null");
    }
    if tau == 0 || users_per_cell == 0 {
        return fail(PilotseqStatus::InvalidArgument, "dimensions must be positive");
    }
    let b = match beta_from_raw(beta, cells) {
        Ok(b) => b,
        Err(status) => return status,
    };
    if users_per_cell < tau {
        return fail(
            PilotseqStatus::NotApplicable,
            format!("requires K >= tau, got K = {users_per_cell}, tau = {tau}"),
        );
    }
    let (pd, class) = bounds::is_positive_definite(&b);
    if !pd {
        return fail(
            PilotseqStatus::NotPositiveDefinite,
            format!("B classified {class:?}"),
        );
    }
    *out = bounds::new_extended_welch_bound(tau, users_per_cell, &b)
        .expect("gates checked above");
    PilotseqStatus::Ok
}
