//! C ABI for carlab.
//!
//! Objects are opaque handles created by `carlab_*_new` style calls and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CarlabStatus`]; on failure the message is available from
//! [`carlab_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary and are reported as `CARLAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use carlab::fock::{FieldOp, FieldVector, FockOperator, ModeSpace, DEFAULT_MAX_MODES};
use carlab::harness::{self, Command, Report, RunOptions};
use carlab::localization::Region;
use carlab::twirl::Partition;
use carlab::CarError;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarlabStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullPointer = 1,
    InvalidArgument = 2,
    /// Mode count above the dense cap, or a cap above the hard maximum.
    CapExceeded = 3,
    DimensionMismatch = 4,
    /// Index out of range: mode, site or matrix entry.
    OutOfRange = 5,
    /// Invalid unitary, contraction, partition or gauge element.
    InvalidObject = 6,
    /// A single mode carries mass at least `eps^2`.
    AtomTooLarge = 7,
    Panic = 8,
}

/// A mode space: sites, fiber dimension and site weights.
pub struct CarlabModeSpace(ModeSpace);

/// A dense operator on the Fock space of `m` modes.
pub struct CarlabOperator(FockOperator);

/// A campaign report.
pub struct CarlabReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &CarError) -> CarlabStatus {
    match err {
        CarError::CapExceeded { .. } | CarError::CapTooLarge { .. } => CarlabStatus::CapExceeded,
        CarError::DimensionMismatch { .. } => CarlabStatus::DimensionMismatch,
        CarError::ModeOutOfRange { .. } | CarError::UnknownSite { .. } | CarError::BlockCountOutOfRange { .. } => {
            CarlabStatus::OutOfRange
        }
        CarError::NotUnitary { .. }
        | CarError::NotContraction { .. }
        | CarError::InvalidPartition(_)
        | CarError::InvalidProjections(_)
        | CarError::InvalidGaugeElement(_)
        | CarError::UnbalancedMonomial { .. } => CarlabStatus::InvalidObject,
        CarError::AtomTooLarge { .. } => CarlabStatus::AtomTooLarge,
        CarError::InvalidModeSpace(_) | CarError::InvalidArgument(_) => CarlabStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Car(CarError),
    Arg(String),
}

impl From<CarError> for Failure {
    fn from(e: CarError) -> Self {
        Failure::Car(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CarlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CarlabStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null or invalid pointer: {what}"));
            CarlabStatus::NullPointer
        }
        Ok(Err(Failure::Car(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(&msg);
            CarlabStatus::InvalidArgument
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            CarlabStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<T>(p: *mut *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    *p = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice_or_empty<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Null(what))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn carlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn carlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a mode space. `weights` holds `site_count` positive numbers, or
/// is null for unit weights.
///
/// # Safety
/// `weights` must be null or point to `site_count` doubles; `out_space` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_mode_space_new(
    site_count: usize,
    fiber_dim: usize,
    weights: *const f64,
    max_modes: usize,
    out_space: *mut *mut CarlabModeSpace,
) -> CarlabStatus {
    guard(|| {
        let w = if weights.is_null() {
            vec![1.0; site_count]
        } else {
            slice::from_raw_parts(weights, site_count).to_vec()
        };
        let cap = if max_modes == 0 { DEFAULT_MAX_MODES } else { max_modes };
        let space = ModeSpace::with_max_modes(site_count, fiber_dim, w, cap)?;
        out(out_space, CarlabModeSpace(space), "out_space")
    })
}

/// # Safety
/// `space` must be null or a handle from `carlab_mode_space_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn carlab_mode_space_free(space: *mut CarlabModeSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of modes `site_count * fiber_dim`, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn carlab_mode_space_mode_count(space: *const CarlabModeSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.mode_count())
}

/// Smeared annihilator `a(f)` (or creator `a(f)^*` when `creator` is true)
/// for `f` given by `mode_count` real and imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `len` doubles; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_field(
    space: *const CarlabModeSpace,
    re: *const f64,
    im: *const f64,
    len: usize,
    creator: bool,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let space = &get(space, "space")?.0;
        let re = slice_or_empty(re, len, "re")?;
        let im = slice_or_empty(im, len, "im")?;
        let f = FieldVector::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect());
        let op = FieldOp::annihilator(space, &f)?;
        let op = if creator { op.adjoint() } else { op };
        out(out_op, CarlabOperator(op.to_dense()), "out_op")
    })
}

/// Identity on the Fock space of `space`.
///
/// # Safety
/// `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_identity(
    space: *const CarlabModeSpace,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let space = &get(space, "space")?.0;
        out(out_op, CarlabOperator(FockOperator::identity(space.mode_count())), "out_op")
    })
}

/// Operator from a column-major array of `4^m` complex entries given as
/// interleaved (re, im) pairs.
///
/// # Safety
/// `entries` must point to `2 * 4^m` doubles; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_from_entries(
    space: *const CarlabModeSpace,
    entries: *const f64,
    len: usize,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let space = &get(space, "space")?.0;
        let d = space.fock_dim();
        if len != 2 * d * d {
            return Err(CarError::DimensionMismatch {
                expected: 2 * d * d,
                found: len,
            }
            .into());
        }
        let data = slice_or_empty(entries, len, "entries")?;
        let mat = DMatrix::from_iterator(d, d, data.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])));
        out(out_op, CarlabOperator(FockOperator::from_matrix(space.mode_count(), mat)?), "out_op")
    })
}

/// # Safety
/// `op` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_free(op: *mut CarlabOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Fock dimension `2^m`, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_dim(op: *const CarlabOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Matrix entry `(row, col)` in the occupation basis (mode 0 is bit 0).
///
/// # Safety
/// `op` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_entry(
    op: *const CarlabOperator,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> CarlabStatus {
    guard(|| {
        let op = &get(op, "op")?.0;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        if row >= op.dim() || col >= op.dim() {
            return Err(Failure::Car(CarError::ModeOutOfRange {
                index: row.max(col),
                modes: op.dim(),
            }));
        }
        let z = op.entry(row, col);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Product `a b`.
///
/// # Safety
/// `a`, `b` must be live handles; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_mul(
    a: *const CarlabOperator,
    b: *const CarlabOperator,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        check_same(a, b)?;
        out(out_op, CarlabOperator(a * b), "out_op")
    })
}

/// `a + c b` for a complex scalar `c = c_re + i c_im`.
///
/// # Safety
/// `a`, `b` must be live handles; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_add_scaled(
    a: *const CarlabOperator,
    b: *const CarlabOperator,
    c_re: f64,
    c_im: f64,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        check_same(a, b)?;
        let sum = a + &b.scale(Complex64::new(c_re, c_im));
        out(out_op, CarlabOperator(sum), "out_op")
    })
}

/// Hermitian adjoint.
///
/// # Safety
/// `a` must be a live handle; `out_op` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_adjoint(
    a: *const CarlabOperator,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        out(out_op, CarlabOperator(a.adjoint()), "out_op")
    })
}

/// Spectral norm.
///
/// # Safety
/// `a` must be a live handle; `norm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_operator_norm(a: *const CarlabOperator, norm: *mut f64) -> CarlabStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        if norm.is_null() {
            return Err(Failure::Null("norm"));
        }
        *norm = a.operator_norm();
        Ok(())
    })
}

fn check_same(a: &FockOperator, b: &FockOperator) -> Result<(), Failure> {
    if a.modes() != b.modes() {
        return Err(CarError::DimensionMismatch {
            expected: a.modes(),
            found: b.modes(),
        }
        .into());
    }
    Ok(())
}

/// Module twirl for the partition with block label `labels[i]` on mode `i`.
///
/// # Safety
/// `labels` must point to `len` entries; `a` must be live; `out_op` writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_twirl(
    a: *const CarlabOperator,
    labels: *const usize,
    len: usize,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        let p = Partition::from_labels(slice_or_empty(labels, len, "labels")?)?;
        out(out_op, CarlabOperator(carlab::twirl::twirl(&p, a)?), "out_op")
    })
}

/// Restriction `nu_W` onto the local algebra of the listed sites.
///
/// # Safety
/// `sites` must point to `len` entries; handles must be live; `out_op` writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_restrict(
    space: *const CarlabModeSpace,
    a: *const CarlabOperator,
    sites: *const usize,
    len: usize,
    out_op: *mut *mut CarlabOperator,
) -> CarlabStatus {
    guard(|| {
        let space = &get(space, "space")?.0;
        let a = &get(a, "a")?.0;
        let w = Region::new(space, slice_or_empty(sites, len, "sites")?)?;
        out(out_op, CarlabOperator(carlab::localization::restrict(space, a, &w)?), "out_op")
    })
}

/// Runs a campaign by name (`verify-car`, `twirl-bound`, `localize`,
/// `net-fixed-points`, `partition`). `config_json` may be null for the
/// defaults; `seed` is applied when `override_seed` is true; `max_modes` of
/// 0 keeps the default dense cap.
///
/// # Safety
/// Strings must be NUL-terminated; `out_report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_run(
    command: *const c_char,
    config_json: *const c_char,
    override_seed: bool,
    seed: u64,
    max_modes: usize,
    out_report: *mut *mut CarlabReport,
) -> CarlabStatus {
    guard(|| {
        let name = str_arg(command, "command")?;
        let command = Command::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Failure::Arg(format!("unknown command {name:?}")))?;
        let config = if config_json.is_null() {
            None
        } else {
            Some(str_arg(config_json, "config_json")?)
        };
        let options = RunOptions {
            seed: override_seed.then_some(seed),
            max_modes: (max_modes != 0).then_some(max_modes),
        };
        let report = harness::run(command, config, &options)?;
        out(out_report, CarlabReport(report), "out_report")
    })
}

/// True when every row of the report passed; false for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn carlab_report_passed(report: *const CarlabReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.passed())
}

/// Number of data rows.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn carlab_report_row_count(report: *const CarlabReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.row_count())
}

/// The report as CSV with its comment preamble. Release with
/// `carlab_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn carlab_report_csv(report: *const CarlabReport, out_csv: *mut *mut c_char) -> CarlabStatus {
    guard(|| {
        let r = &get(report, "report")?.0;
        if out_csv.is_null() {
            return Err(Failure::Null("out_csv"));
        }
        let text = CString::new(r.to_csv_string()).map_err(|_| Failure::Arg("report contains NUL".into()))?;
        *out_csv = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn carlab_report_free(report: *mut CarlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from `carlab_report_csv`, freed once.
#[no_mangle]
pub unsafe extern "C" fn carlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
