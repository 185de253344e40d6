//! C interface: charts, scalar fields and the manifest-driven checks.
//!
//! Every function returns an [`FkStatus`]; on failure a message is available from
//! [`fk_last_error`] until the next call on the same thread. Handles are opaque and owned by the
//! caller, who releases them with the matching `*_free` function. Strings returned by the library
//! are released with [`fk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frobkit::cli::{self, Command, Flags, Outcome};
use frobkit::scalar::{Chart, Point, ScalarField, C};
use frobkit::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Parse = 3,
    Invalid = 4,
    Precondition = 5,
    OutOfRange = 6,
    Eval = 7,
    Panic = 8,
}

pub struct FkChart(Chart);

pub struct FkField(ScalarField);

pub struct FkOutcome(Outcome);

/// Overrides for [`fk_run`]; negative `points` or `seed` and non-positive `tol` keep the manifest's value.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FkFlags {
    pub points: i64,
    pub seed: i64,
    pub tol: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(FkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let status = match &e {
            Error::Parse(_) => FkStatus::Parse,
            Error::Precondition(_) => FkStatus::Precondition,
            Error::Eval(_) => FkStatus::Eval,
            _ => FkStatus::Invalid,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FkStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FkStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(FkStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FkStatus::Utf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(FkStatus::NullPointer, format!("{what} is null")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(FkStatus::NullPointer, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread (empty after a success). Valid until the next call.
#[no_mangle]
pub extern "C" fn fk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library name and version, statically allocated.
#[no_mangle]
pub extern "C" fn fk_version() -> *const c_char {
    concat!("frobkit ", env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Chart with coordinates `names[0..n]`; a complex chart also carries conjugate variables.
///
/// # Safety
/// `names` must point to `n` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fk_chart_new(names: *const *const c_char, n: usize, complex: bool, out: *mut *mut FkChart) -> FkStatus {
    guard(|| {
        if names.is_null() && n > 0 {
            return Err(Fail(FkStatus::NullPointer, "names is null".into()));
        }
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(text(*names.add(i), "coordinate name")?.to_string());
        }
        let domain = if complex { frobkit::scalar::Domain::Complex } else { frobkit::scalar::Domain::Real };
        let chart = Chart::new(&v, domain).map_err(Error::from)?;
        store(out, FkChart(chart))
    })
}

/// # Safety
/// `chart` must come from [`fk_chart_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fk_chart_free(chart: *mut FkChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Number of coordinates.
///
/// # Safety
/// `chart` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_chart_dim(chart: *const FkChart) -> usize {
    chart.as_ref().map_or(0, |c| c.0.dim())
}

/// # Safety
/// `chart` must be a live handle and `src` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fk_field_parse(chart: *const FkChart, src: *const c_char, out: *mut *mut FkField) -> FkStatus {
    guard(|| {
        let c = handle(chart, "chart")?;
        let s = text(src, "expression")?;
        let f = ScalarField::parse(s, &c.0).map_err(Error::from)?;
        store(out, FkField(f))
    })
}

/// # Safety
/// `field` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fk_field_free(field: *mut FkField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Partial derivative with respect to variable `var` (conjugate variables follow the coordinates).
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_field_diff(field: *const FkField, var: usize, out: *mut *mut FkField) -> FkStatus {
    guard(|| {
        let f = handle(field, "field")?;
        if var >= f.0.chart().nvars() {
            return Err(Fail(FkStatus::OutOfRange, format!("variable {var} out of range")));
        }
        store(out, FkField(f.0.diff(var)))
    })
}

/// Canonical text of the field, parseable by [`fk_field_parse`]; release with [`fk_string_free`].
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_field_to_string(field: *const FkField, out: *mut *mut c_char) -> FkStatus {
    guard(|| {
        let f = handle(field, "field")?;
        if out.is_null() {
            return Err(Fail(FkStatus::NullPointer, "output pointer is null".into()));
        }
        *out = owned_string(f.0.to_string());
        Ok(())
    })
}

/// Value at the point whose coordinates are the constant expressions `coords[0..n]`.
///
/// # Safety
/// `field` must be a live handle, `coords` must point to `n` NUL-terminated strings and
/// `re`, `im` to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_field_eval(field: *const FkField, coords: *const *const c_char, n: usize, re: *mut f64, im: *mut f64) -> FkStatus {
    guard(|| {
        let f = handle(field, "field")?;
        let chart = f.0.chart();
        if n != chart.dim() {
            return Err(Fail(FkStatus::OutOfRange, format!("expected {} coordinates, got {n}", chart.dim())));
        }
        if (coords.is_null() && n > 0) || re.is_null() || im.is_null() {
            return Err(Fail(FkStatus::NullPointer, "null argument".into()));
        }
        let mut pt: Vec<C> = Vec::with_capacity(n);
        for i in 0..n {
            let s = text(*coords.add(i), "coordinate")?;
            let v = ScalarField::parse(s, chart).map_err(Error::from)?;
            let c = v.as_constant().ok_or_else(|| Fail(FkStatus::Invalid, format!("coordinate `{s}` is not a constant")))?;
            pt.push(c);
        }
        let p = Point::new(chart, pt).map_err(Error::from)?;
        let v = f.0.evaluate(&p).map_err(Error::from)?;
        *re = v.re_f64();
        *im = v.im_f64();
        Ok(())
    })
}

/// Run `subcommand` on manifest text. Succeeds whenever a report was produced; the check
/// verdict is [`fk_outcome_exit_code`] (0 pass, 1 a check failed, 2 input error).
///
/// # Safety
/// `subcommand` and `manifest` must be NUL-terminated strings; `flags` may be null.
#[no_mangle]
pub unsafe extern "C" fn fk_run(subcommand: *const c_char, manifest: *const c_char, flags: *const FkFlags, out: *mut *mut FkOutcome) -> FkStatus {
    guard(|| {
        let cmd: Command = text(subcommand, "subcommand")?.parse().map_err(|e| Fail(FkStatus::Invalid, e))?;
        let src = text(manifest, "manifest")?;
        let mut f = Flags::default();
        if let Some(fl) = flags.as_ref() {
            f.points = usize::try_from(fl.points).ok();
            f.seed = u64::try_from(fl.seed).ok();
            f.tol = (fl.tol > 0.0).then_some(fl.tol);
        }
        store(out, FkOutcome(cli::run_source(cmd, src, &f)))
    })
}

/// # Safety
/// `outcome` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_outcome_exit_code(outcome: *const FkOutcome) -> i32 {
    outcome.as_ref().map_or(2, |o| o.0.document.exit_code())
}

/// Report document text; release with [`fk_string_free`].
///
/// # Safety
/// `outcome` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_outcome_report(outcome: *const FkOutcome) -> *mut c_char {
    match outcome.as_ref() {
        Some(o) => owned_string(o.0.document.to_string()),
        None => ptr::null_mut(),
    }
}

/// Manifest of the constructed structure, or null when the subcommand constructs nothing.
///
/// # Safety
/// `outcome` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fk_outcome_emitted(outcome: *const FkOutcome) -> *mut c_char {
    match outcome.as_ref().and_then(|o| o.0.emitted.as_ref()) {
        Some(m) => owned_string(m.to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `outcome` must come from [`fk_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fk_outcome_free(outcome: *mut FkOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}
