//! C ABI over `sweatkit`.
//!
//! Every fallible function returns a [`SweatStatus`]; on anything but
//! `SWEAT_STATUS_OK` the message is available from
//! [`sweat_last_error_message`] on the same thread. Spaces are opaque
//! handles released with [`sweat_space_free`]; strings handed out by the
//! library are released with [`sweat_string_free`]. Panics never cross the
//! boundary: they are reported as `SWEAT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::Value;
use sweatkit::alignment::{procrustes_align, AlignOptions};
use sweatkit::commands;
use sweatkit::config::{validate_config, Overrides};
use sweatkit::lexicon::FrequencyTable;
use sweatkit::report::to_json;
use sweatkit::{
    EmbeddingSpace, Error, ErrorClass, PermutationConfig, PoleWordsets, Tail, TopicWordset,
};

/// Outcome of a call. Values are stable across releases.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad configuration or arguments.
    Validation = 3,
    /// Inputs are well-formed but unusable: missing words, degenerate data.
    Data = 4,
    Io = 5,
    Panic = 6,
}

/// Scalar part of a SWEAT result. The full result, per-word values
/// included, is available as JSON from [`sweat_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweatSummary {
    pub score: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub n_permutations: u64,
    /// 1 when every partition was enumerated, 0 for Monte Carlo.
    pub exact: u8,
}

/// Opaque embedding space.
pub struct SweatSpace(EmbeddingSpace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SweatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Validation => SweatStatus::Validation,
            ErrorClass::Data => SweatStatus::Data,
            ErrorClass::Io => SweatStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(SweatStatus::Validation, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SweatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SweatStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SweatStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SweatStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            SweatStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn space<'a>(p: *const SweatSpace, what: &str) -> Result<&'a EmbeddingSpace, Failure> {
    p.as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| Failure(SweatStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(SweatStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Message of the last failed call on this thread, or null after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn sweat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sweat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sweat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a word2vec text file into a new space handle.
///
/// # Safety
/// `path` and `label` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_space_load(
    path: *const c_char,
    label: *const c_char,
    out: *mut *mut SweatSpace,
) -> SweatStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = text(path, "path")?;
        let label = text(label, "label")?;
        let s = sweatkit::load_word2vec_text(path, label)?;
        *out = Box::into_raw(Box::new(SweatSpace(s)));
        Ok(())
    })
}

/// Releases a space. Null is ignored.
///
/// # Safety
/// `space` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sweat_space_free(space: *mut SweatSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Vector dimension, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sweat_space_dimension(space: *const SweatSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.dimension())
}

/// Vocabulary size, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sweat_space_len(space: *const SweatSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.len())
}

/// Cosine similarity of two words of one space.
///
/// # Safety
/// Pointers must be valid; `a` and `b` nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_space_cosine(
    space: *const SweatSpace,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> SweatStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let s = self::space(space, "space")?;
        *out = s.cosine_words(text(a, "a")?, text(b, "b")?)?;
        Ok(())
    })
}

/// Zipf score `log10(count / total · 10⁹)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_zipf(count: u64, total_tokens: u64, out: *mut f64) -> SweatStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let table = FrequencyTable::new([("w", count)], total_tokens)?;
        *out = table.zipf("w").expect("just inserted");
        Ok(())
    })
}

fn field<T: serde::de::DeserializeOwned>(request: &Value, key: &str) -> Result<Option<T>, Failure> {
    match request.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| invalid(format!("{key}: {e}"))),
    }
}

/// Runs SWEAT on two spaces. `request_json` holds `topic` (`label`,
/// `words`), `poles` (`label_a`, `words_a`, `label_b`, `words_b`) and
/// optionally `permutations` and `tail`, with the same shapes as the run
/// configuration file. `summary` receives the scalars; when `out_json` is
/// not null it receives the full result, to be freed with
/// [`sweat_string_free`].
///
/// # Safety
/// Handles must be live; `request_json` nul-terminated; `summary` writable;
/// `out_json` null or writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_run(
    space1: *const SweatSpace,
    space2: *const SweatSpace,
    request_json: *const c_char,
    summary: *mut SweatSummary,
    out_json: *mut *mut c_char,
) -> SweatStatus {
    guard(|| {
        out_ptr(summary, "summary")?;
        let (s1, s2) = (space(space1, "space1")?, space(space2, "space2")?);
        let request: Value = serde_json::from_str(text(request_json, "request_json")?)
            .map_err(|e| invalid(format!("request_json: {e}")))?;
        let topic: TopicWordset =
            field(&request, "topic")?.ok_or_else(|| invalid("topic is required"))?;
        let poles: PoleWordsets =
            field(&request, "poles")?.ok_or_else(|| invalid("poles is required"))?;
        let cfg: PermutationConfig = field(&request, "permutations")?.unwrap_or_default();
        let tail: Tail = field(&request, "tail")?.unwrap_or_default();
        let result = sweatkit::run_sweat(&topic, s1, s2, &poles, &cfg, tail)?;
        *summary = SweatSummary {
            score: result.score,
            effect_size: result.effect_size,
            p_value: result.p_value,
            n_permutations: result.n_permutations,
            exact: u8::from(result.method == sweatkit::association::Method::Exact),
        };
        if !out_json.is_null() {
            *out_json = into_c_string(to_json(&result));
        }
        Ok(())
    })
}

/// Aligns `source` onto `target` using `n_anchors` anchor words; writes a
/// new handle for the mapped source space and the mean squared anchor
/// residual.
///
/// # Safety
/// Handles must be live; `anchors` must point to `n_anchors` nul-terminated
/// strings; `out` and `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_align(
    source: *const SweatSpace,
    target: *const SweatSpace,
    anchors: *const *const c_char,
    n_anchors: usize,
    center: bool,
    out: *mut *mut SweatSpace,
    residual: *mut f64,
) -> SweatStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(residual, "residual")?;
        let (src, tgt) = (space(source, "source")?, space(target, "target")?);
        if anchors.is_null() && n_anchors > 0 {
            return Err(Failure(SweatStatus::NullPointer, "anchors is null".into()));
        }
        let words = (0..n_anchors)
            .map(|i| text(*anchors.add(i), "anchor").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        let (aligned, report) = procrustes_align(src, tgt, &words, AlignOptions { center })?;
        *residual = report.residual;
        *out = Box::into_raw(Box::new(SweatSpace(aligned)));
        Ok(())
    })
}

/// Runs the `sweat` command on a configuration file, writing the
/// configured outputs, and returns the report JSON through `out_json`
/// (free with [`sweat_string_free`]).
///
/// # Safety
/// `config_path` nul-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sweat_run_config(
    config_path: *const c_char,
    out_json: *mut *mut c_char,
) -> SweatStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let cfg = validate_config(text(config_path, "config_path")?, &Overrides::default())?;
        let report = commands::sweat(&cfg)?;
        commands::write_sweat_outputs(&report)?;
        *out_json = into_c_string(to_json(&report));
        Ok(())
    })
}
