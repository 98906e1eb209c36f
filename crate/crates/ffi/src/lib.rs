//! C ABI over the vizalg core.
//!
//! Specifications cross the boundary as JSON strings and live on the Rust
//! side behind opaque `VizRel` handles. Every call returns a `VizStatus`; on
//! failure `viz_last_error` describes what went wrong on the calling thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with `viz_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vizalg::analysis::{distance, merge_versions, MergeOutcome, WeightConfig};
use vizalg::operators::{difference, intersect, union, How, On, OpParams};
use vizalg::spec::parse_spec;
use vizalg::{from_spec, serialize_spec, to_spec, RelViz};

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VizStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The specification or weight document could not be parsed.
    ParseError = 3,
    /// An operator rejected its inputs.
    OperatorError = 4,
    /// A three-way merge found conflicting edits.
    Conflict = 5,
    /// An enumeration argument was out of range.
    InvalidArgument = 6,
    /// The library panicked; this is a bug.
    Panic = 7,
}

/// Join columns for the set operators.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VizOn {
    Key = 0,
    All = 1,
}

/// Conflict policy for union.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VizHow {
    Left = 0,
    Right = 1,
    Merge = 2,
}

/// Opaque relational visualization.
pub struct VizRel(RelViz);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(text).expect("nul bytes removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Failure = (VizStatus, String);

/// Runs `body`, recording its error message and converting panics.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VizStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VizStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            VizStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((VizStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (VizStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_rel<'a>(p: *const VizRel, what: &str) -> Result<&'a RelViz, Failure> {
    p.as_ref()
        .map(|r| &r.0)
        .ok_or_else(|| (VizStatus::NullArgument, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err((VizStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn into_c(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

fn on_arg(on: u32) -> Result<On, Failure> {
    match on {
        x if x == VizOn::Key as u32 => Ok(On::Key),
        x if x == VizOn::All as u32 => Ok(On::All),
        _ => Err((
            VizStatus::InvalidArgument,
            format!("unknown join mode {on}"),
        )),
    }
}

fn how_arg(how: u32) -> Result<How, Failure> {
    match how {
        x if x == VizHow::Left as u32 => Ok(How::Left),
        x if x == VizHow::Right as u32 => Ok(How::Right),
        x if x == VizHow::Merge as u32 => Ok(How::Merge),
        _ => Err((
            VizStatus::InvalidArgument,
            format!("unknown conflict policy {how}"),
        )),
    }
}

fn operator_error(e: impl ToString) -> Failure {
    (VizStatus::OperatorError, e.to_string())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn viz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn viz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON specification into a handle.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_rel_from_json(
    json: *const c_char,
    keep_unencoded: bool,
    out: *mut *mut VizRel,
) -> VizStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(json, "json")?;
        let spec = parse_spec(text).map_err(|e| (VizStatus::ParseError, e.to_string()))?;
        let rel =
            from_spec(&spec, keep_unencoded).map_err(|e| (VizStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(VizRel(rel)));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `rel` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn viz_rel_free(rel: *mut VizRel) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// Serializes a handle back to a JSON specification.
///
/// # Safety
/// `rel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_rel_to_json(rel: *const VizRel, out: *mut *mut c_char) -> VizStatus {
    guard(|| {
        check_out(out, "out")?;
        let spec = to_spec(read_rel(rel, "rel")?).map_err(operator_error)?;
        *out = into_c(serialize_spec(&spec));
        Ok(())
    })
}

/// Union of two visualizations, link repair and indicator encoding included.
///
/// # Safety
/// `left` and `right` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_union(
    left: *const VizRel,
    right: *const VizRel,
    on: u32,
    how: u32,
    auto_encoding: bool,
    out: *mut *mut VizRel,
) -> VizStatus {
    guard(|| {
        check_out(out, "out")?;
        let params = OpParams::default()
            .on(on_arg(on)?)
            .how(how_arg(how)?)
            .auto_encoding(auto_encoding);
        let result = union(read_rel(left, "left")?, read_rel(right, "right")?, params)
            .map_err(operator_error)?;
        *out = Box::into_raw(Box::new(VizRel(result.merged)));
        Ok(())
    })
}

type SetOp = fn(
    &RelViz,
    &RelViz,
    OpParams,
) -> (
    vizalg::operators::MarkedData,
    vizalg::operators::MarkedStyle,
);

unsafe fn set_op(
    op: SetOp,
    left: *const VizRel,
    right: *const VizRel,
    on: u32,
    data_csv: *mut *mut c_char,
    style_csv: *mut *mut c_char,
) -> VizStatus {
    guard(|| {
        check_out(data_csv, "data_csv")?;
        check_out(style_csv, "style_csv")?;
        let params = OpParams::default().on(on_arg(on)?);
        let (data, style) = op(read_rel(left, "left")?, read_rel(right, "right")?, params);
        *data_csv = into_c(data.to_csv());
        *style_csv = into_c(style.to_csv());
        Ok(())
    })
}

/// Rows present on both sides, as CSV with an indicator column.
///
/// # Safety
/// `left` and `right` must be live handles; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_intersect(
    left: *const VizRel,
    right: *const VizRel,
    on: u32,
    data_csv: *mut *mut c_char,
    style_csv: *mut *mut c_char,
) -> VizStatus {
    set_op(intersect, left, right, on, data_csv, style_csv)
}

/// Rows present on one side only, as CSV with an indicator column.
///
/// # Safety
/// `left` and `right` must be live handles; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_difference(
    left: *const VizRel,
    right: *const VizRel,
    on: u32,
    data_csv: *mut *mut c_char,
    style_csv: *mut *mut c_char,
) -> VizStatus {
    set_op(difference, left, right, on, data_csv, style_csv)
}

/// Weighted distance. `weights_toml` may be null for uniform weights.
///
/// # Safety
/// `a` and `b` must be live handles; `weights_toml` null or nul-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_distance(
    a: *const VizRel,
    b: *const VizRel,
    weights_toml: *const c_char,
    out: *mut f64,
) -> VizStatus {
    guard(|| {
        check_out(out, "out")?;
        let weights = if weights_toml.is_null() {
            WeightConfig::default()
        } else {
            WeightConfig::from_toml(read_str(weights_toml, "weights_toml")?)
                .map_err(|e| (VizStatus::ParseError, e.to_string()))?
        };
        *out = distance(read_rel(a, "a")?, read_rel(b, "b")?, &weights);
        Ok(())
    })
}

/// Three-way merge. On success `merged` receives a new handle. On
/// `VizStatus::Conflict` `conflicts` receives the conflict listing, one per
/// line; `conflicts` may be null if the caller does not want it.
///
/// # Safety
/// All three inputs must be live handles; `merged` must be writable.
#[no_mangle]
pub unsafe extern "C" fn viz_merge(
    base: *const VizRel,
    ours: *const VizRel,
    theirs: *const VizRel,
    merged: *mut *mut VizRel,
    conflicts: *mut *mut c_char,
) -> VizStatus {
    guard(|| {
        check_out(merged, "merged")?;
        match merge_versions(
            read_rel(base, "base")?,
            read_rel(ours, "ours")?,
            read_rel(theirs, "theirs")?,
        ) {
            MergeOutcome::Merged(rel) => {
                *merged = Box::into_raw(Box::new(VizRel(rel)));
                Ok(())
            }
            MergeOutcome::Conflict(report) => {
                let text = report.to_string();
                if !conflicts.is_null() {
                    *conflicts = into_c(text.clone());
                }
                Err((VizStatus::Conflict, text))
            }
        }
    })
}
