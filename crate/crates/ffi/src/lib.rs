//! C ABI over the `kcolor` library.
//!
//! Objects cross the boundary as opaque handles. Constructors write the new
//! handle through an out-pointer; each handle is released with the matching
//! `kc_*_free`. Every fallible call
//! returns a [`KcStatus`]; on failure the message is available from
//! [`kc_last_error`] on the same thread. Strings returned by the library are
//! owned by the caller and must be released with [`kc_string_free`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kcolor::csp::{generate_planted, Assignment, CspInstance};
use kcolor::graph::{is_k_colorable, score, Coloring, Weight, WeightedGraph};
use kcolor::reduce3::{build_3color_instance, decode_coloring, encode_assignment, Reduction3Output};
use kcolor::spectral::{dmr_operator, spectral_radius};
use kcolor::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed text, JSON or UTF-8.
    Parse = 2,
    /// Structurally invalid input (graph, coloring, instance, parameter).
    InvalidInput = 3,
    /// The requested computation exceeds the given budget.
    Budget = 4,
    /// A value does not fit the C representation.
    Overflow = 5,
    /// Internal failure, including a caught panic.
    Internal = 6,
}

/// Exact rational `num / den` with `den > 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KcRational {
    pub num: i64,
    pub den: i64,
}

/// Constraint system instance.
pub struct KcCsp {
    inner: CspInstance,
}

/// Weighted graph.
pub struct KcGraph {
    inner: WeightedGraph,
}

/// Result of the CSP to 3-coloring reduction, bound to its source instance.
pub struct KcReduction {
    csp: CspInstance,
    out: Reduction3Output,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> KcStatus {
    match err {
        Error::BudgetExceeded { .. } => KcStatus::Budget,
        Error::Parse { .. } | Error::Json(_) => KcStatus::Parse,
        Error::Io(_) => KcStatus::Internal,
        _ => KcStatus::InvalidInput,
    }
}

struct Fail(KcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> KcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KcStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(KcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(KcStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn rational(w: &Weight) -> Result<KcRational, Fail> {
    let conv = |v: i128| {
        i64::try_from(v).map_err(|_| Fail(KcStatus::Overflow, format!("{w} does not fit in 64 bits")))
    };
    Ok(KcRational {
        num: conv(*w.numer())?,
        den: conv(*w.denom())?,
    })
}

fn owned_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(KcStatus::Internal, "string contains NUL".into()))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- CSP ------------------------------------------------------------------

/// Parses a CSP instance from JSON.
#[no_mangle]
pub unsafe extern "C" fn kc_csp_from_json(json: *const c_char, out: *mut *mut KcCsp) -> KcStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        *out = into_handle(KcCsp {
            inner: CspInstance::from_json(text)?,
        });
        Ok(())
    })
}

/// Generates a satisfiable instance. When `assignment_json` is non-null it
/// receives the planted assignment as JSON.
#[no_mangle]
pub unsafe extern "C" fn kc_csp_generate_planted(
    seed: u64,
    nx: usize,
    ny: usize,
    nz: usize,
    m: usize,
    out: *mut *mut KcCsp,
    assignment_json: *mut *mut c_char,
) -> KcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let (inst, a) = generate_planted(seed, nx, ny, nz, m)?;
        if let Some(slot) = assignment_json.as_mut() {
            *slot = owned_string(a.to_json())?;
        }
        *out = into_handle(KcCsp { inner: inst });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_csp_to_json(csp: *const KcCsp, out: *mut *mut c_char) -> KcStatus {
    guard(|| {
        let csp = ref_arg(csp, "csp")?;
        *out_arg(out, "out")? = owned_string(csp.inner.to_json())?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_csp_constraint_count(csp: *const KcCsp, out: *mut usize) -> KcStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(csp, "csp")?.inner.m();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_csp_free(csp: *mut KcCsp) {
    if !csp.is_null() {
        drop(Box::from_raw(csp));
    }
}

// ---- 3-coloring reduction -------------------------------------------------

/// Builds the weighted 3-coloring instance of `csp`.
#[no_mangle]
pub unsafe extern "C" fn kc_reduce_3color(csp: *const KcCsp, out: *mut *mut KcReduction) -> KcStatus {
    guard(|| {
        let csp = ref_arg(csp, "csp")?;
        let out = out_arg(out, "out")?;
        let red = build_3color_instance(&csp.inner)?;
        *out = into_handle(KcReduction {
            csp: csp.inner.clone(),
            out: red,
        });
        Ok(())
    })
}

/// Copy of the reduced graph as an independent handle.
#[no_mangle]
pub unsafe extern "C" fn kc_reduction_graph(red: *const KcReduction, out: *mut *mut KcGraph) -> KcStatus {
    guard(|| {
        let red = ref_arg(red, "reduction")?;
        *out_arg(out, "out")? = into_handle(KcGraph {
            inner: red.out.graph.clone(),
        });
        Ok(())
    })
}

/// Writes the 3-coloring that encodes `assignment_json` into `colors`, which
/// must hold exactly one entry per vertex of the reduced graph.
#[no_mangle]
pub unsafe extern "C" fn kc_reduction_encode(
    red: *const KcReduction,
    assignment_json: *const c_char,
    colors: *mut u32,
    len: usize,
) -> KcStatus {
    guard(|| {
        let red = ref_arg(red, "reduction")?;
        let a = Assignment::from_json(str_arg(assignment_json, "assignment_json")?)?;
        if colors.is_null() {
            return Err(null("colors"));
        }
        let n = red.out.graph.vertex_count();
        if len != n {
            return Err(Fail(
                KcStatus::InvalidInput,
                format!("colors buffer has {len} entries, the graph has {n} vertices"),
            ));
        }
        let c = encode_assignment(&red.csp, &red.out.layout, &a)?;
        std::slice::from_raw_parts_mut(colors, len).copy_from_slice(c.colors());
        Ok(())
    })
}

/// Decodes a 3-coloring (`colors[v]` in `1..=3`) of the reduced graph and
/// reports how many constraints the decoded assignment satisfies.
#[no_mangle]
pub unsafe extern "C" fn kc_reduction_decode(
    red: *const KcReduction,
    colors: *const u32,
    len: usize,
    satisfied: *mut usize,
) -> KcStatus {
    guard(|| {
        let red = ref_arg(red, "reduction")?;
        let satisfied = out_arg(satisfied, "satisfied")?;
        if colors.is_null() && len > 0 {
            return Err(null("colors"));
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(colors, len) };
        let c = Coloring::new(3, slice.to_vec())?;
        let dec = decode_coloring(&red.csp, &red.out.layout, &red.out.graph, &c)?;
        *satisfied = dec.satisfied;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_reduction_free(red: *mut KcReduction) {
    if !red.is_null() {
        drop(Box::from_raw(red));
    }
}

// ---- graphs ---------------------------------------------------------------

/// Parses the `wgraph` text format.
#[no_mangle]
pub unsafe extern "C" fn kc_graph_from_text(text: *const c_char, out: *mut *mut KcGraph) -> KcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        *out = into_handle(KcGraph {
            inner: WeightedGraph::from_text(text)?,
        });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_graph_to_text(g: *const KcGraph, out: *mut *mut c_char) -> KcStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        *out_arg(out, "out")? = owned_string(g.inner.to_text())?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_graph_vertex_count(g: *const KcGraph, out: *mut usize) -> KcStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "graph")?.inner.vertex_count();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_graph_edge_count(g: *const KcGraph, out: *mut usize) -> KcStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "graph")?.inner.edge_count();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_graph_total_weight(g: *const KcGraph, out: *mut KcRational) -> KcStatus {
    guard(|| {
        let w = ref_arg(g, "graph")?.inner.total_weight();
        *out_arg(out, "out")? = rational(&w)?;
        Ok(())
    })
}

/// Weight of properly colored edges under `colors[v]` in `1..=k`.
#[no_mangle]
pub unsafe extern "C" fn kc_graph_score(
    g: *const KcGraph,
    k: u32,
    colors: *const u32,
    len: usize,
    proper: *mut KcRational,
) -> KcStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let proper = out_arg(proper, "proper")?;
        if colors.is_null() && len > 0 {
            return Err(null("colors"));
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(colors, len) };
        let c = Coloring::new(k, slice.to_vec())?;
        *proper = rational(&score(&g.inner, &c)?.proper_weight)?;
        Ok(())
    })
}

/// Exact k-colorability with a search-node budget.
#[no_mangle]
pub unsafe extern "C" fn kc_graph_is_k_colorable(
    g: *const KcGraph,
    k: u32,
    budget: u64,
    out: *mut bool,
) -> KcStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        *out_arg(out, "out")? = is_k_colorable(&g.inner, k, budget)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_graph_free(g: *mut KcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

// ---- spectral -------------------------------------------------------------

/// Second-largest absolute eigenvalue of the zero-diagonal pair operator on
/// `[q]²`; needs `q >= 4`.
#[no_mangle]
pub unsafe extern "C" fn kc_dmr_spectral_radius(q: usize, out: *mut f64) -> KcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = spectral_radius(&dmr_operator(q)?)?;
        Ok(())
    })
}
