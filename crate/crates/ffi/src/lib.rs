//! C interface to the gibmap explanation engine.
//!
//! Networks are opaque handles. Every fallible call returns a [`GibStatus`];
//! on failure a message is available from [`gib_last_error`] on the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and must be released with [`gib_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gibmap::cli::render_json;
use gibmap::model::StrictMap;
use gibmap::oracle::{gib_map_bruteforce, Caps};
use gibmap::semantics::{GibTest, DEFAULT_EPS};
use gibmap::{gib_map_search, Error, Evidence, Network, SearchConfig};
use libc::{c_char, size_t};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GibStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The network, evidence or query parameters were rejected.
    InvalidInput = 3,
    /// No explanation of positive probability exists.
    NoExplanation = 4,
    /// Exhaustive enumeration would exceed its cap.
    TooLarge = 5,
    /// An internal error; the library state is still usable.
    Internal = 6,
}

/// Query parameters for [`gib_explain_json`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibQuery {
    /// Relaxation of the independence test; 0 demands exact independence.
    pub delta: f64,
    /// Relative tolerance for treating two conditionals as equal.
    pub eps: f64,
    /// Number of explanations to return.
    pub k: u32,
    /// Allow expansions to narrow the set of a non-evidence node.
    pub refine_target: bool,
}

/// Opaque validated network.
pub struct GibNetwork {
    net: Network,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Status(GibStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> GibStatus {
    match e {
        Error::AgendaExhausted => GibStatus::NoExplanation,
        Error::TooLarge { .. } => GibStatus::TooLarge,
        _ => GibStatus::InvalidInput,
    }
}

/// Runs `body`, converting errors and panics into a status and a message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GibStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            GibStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal error");
            GibStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(GibStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Status(GibStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|_| Failure::Status(GibStatus::Internal, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Parses an evidence object `{"name": "value", ...}`; null means no
/// evidence.
///
/// # Safety
/// `json` must be null or a NUL-terminated string valid for reads.
unsafe fn read_evidence(net: &Network, json: *const c_char) -> Result<Evidence, Failure> {
    if json.is_null() {
        return Ok(Evidence::default());
    }
    let text = read_str(json, "evidence")?;
    let map: StrictMap<String> =
        serde_json::from_str(text).map_err(|e| Failure::Lib(Error::Parse(format!("evidence: {e}"))))?;
    Ok(Evidence::from_pairs(net, map.iter())?)
}

fn install(out: *mut *mut GibNetwork, net: Network) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(GibNetwork { net })) };
}

/// Default query: exact test with relative tolerance 1e-9, one explanation,
/// target narrowing enabled.
#[no_mangle]
pub extern "C" fn gib_query_default() -> GibQuery {
    GibQuery { delta: 0.0, eps: DEFAULT_EPS, k: 1, refine_target: true }
}

/// Parses and validates a network from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gib_network_from_json(json: *const c_char, out: *mut *mut GibNetwork) -> GibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        install(out, Network::from_json(text)?);
        Ok(())
    })
}

/// Reads and validates a network file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gib_network_from_file(path: *const c_char, out: *mut *mut GibNetwork) -> GibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = read_str(path, "path")?;
        install(out, Network::from_path(path)?);
        Ok(())
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gib_network_free(net: *mut GibNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of variables; 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gib_network_variable_count(net: *const GibNetwork) -> size_t {
    net.as_ref().map_or(0, |n| n.net.len())
}

/// Runs the best-first search and writes the explanations as JSON to `out`.
/// `evidence_json` may be null for no evidence and `query` null for
/// [`gib_query_default`].
///
/// # Safety
/// `net` must be a live handle, string arguments NUL-terminated, `query`
/// null or valid for reads, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gib_explain_json(
    net: *const GibNetwork,
    evidence_json: *const c_char,
    query: *const GibQuery,
    out: *mut *mut c_char,
) -> GibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let net = &net.as_ref().ok_or_else(|| null("network"))?.net;
        let q = query.as_ref().copied().unwrap_or_else(|| gib_query_default());
        let evidence = read_evidence(net, evidence_json)?;
        let config = SearchConfig {
            test: GibTest { delta: q.delta, eps: q.eps },
            k: q.k as usize,
            refine_target: q.refine_target,
            trace: false,
        };
        let found = gib_map_search(net, &evidence, &config)?;
        write_string(out, render_json(net, &evidence, &found.explanations))
    })
}

/// Finds the best explanation by exhaustive enumeration and writes it as
/// JSON to `out`.
///
/// # Safety
/// As for [`gib_explain_json`].
#[no_mangle]
pub unsafe extern "C" fn gib_oracle_json(
    net: *const GibNetwork,
    evidence_json: *const c_char,
    out: *mut *mut c_char,
) -> GibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let net = &net.as_ref().ok_or_else(|| null("network"))?.net;
        let evidence = read_evidence(net, evidence_json)?;
        let best = gib_map_bruteforce(net, &evidence, Caps::default())?;
        write_string(out, render_json(net, &evidence, std::slice::from_ref(&best)))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gib_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn gib_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gib_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
