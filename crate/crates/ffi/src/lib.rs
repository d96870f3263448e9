//! C ABI for the layout engine.
//!
//! Handles are opaque; every fallible call returns a [`StorygemStatus`] and
//! leaves a JSON description of the failure in a thread-local slot read by
//! [`storygem_last_error`]. Strings handed out must be released with
//! [`storygem_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use storygem::corpus::read_word_list;
use storygem::embeddings::load_all_vectors;
use storygem::pipeline::{render_svg, run_layout, EmbeddingSource, LayoutOutput, LayoutParams, PipelineError, Resources, Stage};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorygemStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Io = 4,
    Pipeline = 5,
    Panic = 6,
}

/// Loaded word vectors and filter lists; safe to share across threads.
pub struct StorygemEngine {
    resources: Resources,
}

/// A solved layout.
pub struct StorygemLayout {
    output: LayoutOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(e: &PipelineError) {
    let msg = CString::new(e.to_json()).unwrap_or_default();
    LAST_ERROR.with(|s| *s.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|s| *s.borrow_mut() = None);
}

fn fail(status: StorygemStatus, stage: Stage, kind: &str, detail: impl std::fmt::Display) -> StorygemStatus {
    set_error(&PipelineError::new(stage, kind, detail));
    status
}

fn guarded(f: impl FnOnce() -> StorygemStatus) -> StorygemStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(StorygemStatus::Panic, Stage::Config, "Panic", "panic inside storygem"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, StorygemStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|e| fail(StorygemStatus::InvalidUtf8, Stage::Config, "InvalidUtf8", format!("{name}: {e}")))
}

unsafe fn required<'a>(p: *const c_char, name: &str) -> Result<&'a str, StorygemStatus> {
    str_arg(p, name)?.ok_or_else(|| fail(StorygemStatus::NullArgument, Stage::Config, "NullArgument", name))
}

fn give_string(s: String, out: *mut *mut c_char) -> StorygemStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            StorygemStatus::Ok
        }
        Err(e) => fail(StorygemStatus::Pipeline, Stage::Render, "InteriorNul", e),
    }
}

/// Loads `vectors_path` (fastText .vec) and, if non-null, a stop-word list.
///
/// # Safety
/// String arguments must be null or valid NUL-terminated strings; `out` must
/// be a valid pointer. On success `*out` owns a handle for
/// [`storygem_engine_free`].
#[no_mangle]
pub unsafe extern "C" fn storygem_engine_new(
    vectors_path: *const c_char,
    stopwords_path: *const c_char,
    out: *mut *mut StorygemEngine,
) -> StorygemStatus {
    guarded(|| {
        if out.is_null() {
            return fail(StorygemStatus::NullArgument, Stage::Config, "NullArgument", "out");
        }
        *out = ptr::null_mut();
        let vectors = match required(vectors_path, "vectors_path") {
            Ok(v) => v,
            Err(s) => return s,
        };
        let stopwords = match str_arg(stopwords_path, "stopwords_path") {
            Ok(Some(p)) => match read_word_list(Path::new(p)) {
                Ok(set) => Some(set),
                Err(e) => return fail(StorygemStatus::Io, Stage::Corpus, "WordList", e),
            },
            Ok(None) => None,
            Err(s) => return s,
        };
        let table = match load_all_vectors(Path::new(vectors)) {
            Ok(t) => t,
            Err(e) => return fail(StorygemStatus::Io, Stage::Embeddings, "Load", e),
        };
        let engine = StorygemEngine {
            resources: Resources {
                embeddings: EmbeddingSource::Shared(Arc::new(table)),
                stopwords,
                lexicon: None,
            },
        };
        *out = Box::into_raw(Box::new(engine));
        StorygemStatus::Ok
    })
}

/// # Safety
/// `engine` must be null or a handle from [`storygem_engine_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn storygem_engine_free(engine: *mut StorygemEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Runs the pipeline on `text`. `params_json` may be null for defaults, or a
/// JSON object with kebab-case keys (`max-words`, `k`, `weighting`,
/// `container`, `font`, `optimize-font`, `rotation-step`, `hyphenate`, `seed`,
/// `language`).
///
/// # Safety
/// `engine` must be a live handle; strings null or NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn storygem_layout(
    engine: *const StorygemEngine,
    text: *const c_char,
    params_json: *const c_char,
    out: *mut *mut StorygemLayout,
) -> StorygemStatus {
    guarded(|| {
        if engine.is_null() || out.is_null() {
            return fail(StorygemStatus::NullArgument, Stage::Config, "NullArgument", "engine/out");
        }
        *out = ptr::null_mut();
        let text = match required(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let params: LayoutParams = match str_arg(params_json, "params_json") {
            Ok(Some(j)) => match serde_json::from_str(j) {
                Ok(p) => p,
                Err(e) => return fail(StorygemStatus::InvalidConfig, Stage::Config, "InvalidConfig", e),
            },
            Ok(None) => LayoutParams::default(),
            Err(s) => return s,
        };
        match run_layout(text, &params, &(*engine).resources) {
            Ok(output) => {
                *out = Box::into_raw(Box::new(StorygemLayout { output }));
                StorygemStatus::Ok
            }
            Err(e) => {
                set_error(&e);
                if e.stage == Stage::Config {
                    StorygemStatus::InvalidConfig
                } else {
                    StorygemStatus::Pipeline
                }
            }
        }
    })
}

/// # Safety
/// `layout` must be null or a handle from [`storygem_layout`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_free(layout: *mut StorygemLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// Number of words laid out; 0 for a null handle.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_word_count(layout: *const StorygemLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.output.document.leaves().len())
}

/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_cluster_count(layout: *const StorygemLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.output.cluster_count())
}

/// Largest relative cell-area error over all levels; NaN for a null handle.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_max_area_error(layout: *const StorygemLayout) -> f64 {
    layout.as_ref().map_or(f64::NAN, |l| l.output.document.stats.max_area_error)
}

/// # Safety
/// `layout` must be a live handle and `out` a valid pointer. The string is
/// released with [`storygem_string_free`].
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_to_json(layout: *const StorygemLayout, out: *mut *mut c_char) -> StorygemStatus {
    guarded(|| {
        if layout.is_null() || out.is_null() {
            return fail(StorygemStatus::NullArgument, Stage::Config, "NullArgument", "layout/out");
        }
        *out = ptr::null_mut();
        give_string((*layout).output.document.to_json(), out)
    })
}

/// # Safety
/// As for [`storygem_layout_to_json`].
#[no_mangle]
pub unsafe extern "C" fn storygem_layout_to_svg(layout: *const StorygemLayout, out: *mut *mut c_char) -> StorygemStatus {
    guarded(|| {
        if layout.is_null() || out.is_null() {
            return fail(StorygemStatus::NullArgument, Stage::Config, "NullArgument", "layout/out");
        }
        *out = ptr::null_mut();
        let mut timings = (*layout).output.timings.clone();
        match render_svg(&(*layout).output.document, &mut timings) {
            Ok(svg) => give_string(svg, out),
            Err(e) => {
                set_error(&e);
                StorygemStatus::Pipeline
            }
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn storygem_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// JSON `{error, stage, detail}` for the last failure on this thread, or
/// null. Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn storygem_last_error() -> *const c_char {
    LAST_ERROR.with(|s| s.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn storygem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
