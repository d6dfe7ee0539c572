//! C ABI over `contraction-ph`.
//!
//! Graphs and loops are opaque handles created and freed through this API.
//! Every fallible call returns a [`CphStatus`]; on failure the message is
//! available from [`cph_last_error_message`] on the same thread. Strings
//! returned through `char **` outputs are owned by the caller and released
//! with [`cph_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use contraction_ph::contraction::{choose_basepoint, verify_retraction};
use contraction_ph::graph::io::parse_graph;
use contraction_ph::graph::{is_geodesic_circle, sample_space, shortest_cycle, Loop, MetricGraph};
use contraction_ph::obstruction::{build_concentric_counterexample, winding_obstruction_search};
use contraction_ph::rips::{build_rips_filtration_with_budget, reduce_persistence};
use contraction_ph::{Error, Rational};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CphStatus {
    Ok = 0,
    InvalidInput = 1,
    Schema = 2,
    Disconnected = 3,
    NoCycle = 4,
    HypothesisViolation = 5,
    InvalidBasepoint = 6,
    BudgetExceeded = 7,
    Internal = 8,
    Io = 9,
    NullPointer = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// Opaque metric graph.
pub struct CphGraph {
    inner: Arc<MetricGraph>,
}

/// Opaque closed walk in a graph.
pub struct CphLoop {
    inner: Loop,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CphStatus {
    match e {
        Error::InvalidInput(_) => CphStatus::InvalidInput,
        Error::Schema { .. } => CphStatus::Schema,
        Error::Disconnected => CphStatus::Disconnected,
        Error::NoCycle => CphStatus::NoCycle,
        Error::HypothesisViolation(_) => CphStatus::HypothesisViolation,
        Error::InvalidBasepoint(_) => CphStatus::InvalidBasepoint,
        Error::BudgetExceeded { .. } => CphStatus::BudgetExceeded,
        Error::Internal(_) => CphStatus::Internal,
        Error::Io(_) => CphStatus::Io,
    }
}

/// Failure inside this layer, before or after the library call.
struct Failure(CphStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CphStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CphStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside contraction-ph".into());
            CphStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CphStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(CphStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_rational(p: *const c_char, what: &str) -> Result<Rational, Failure> {
    // SAFETY: forwarded from the caller's contract.
    Ok(unsafe { read_str(p, what) }?.parse::<Rational>()?)
}

unsafe fn graph_ref<'a>(g: *const CphGraph) -> Result<&'a CphGraph, Failure> {
    // SAFETY: a non-NULL handle came from `cph_graph_from_json` and is not freed.
    unsafe { g.as_ref() }.ok_or_else(|| null("graph"))
}

unsafe fn loop_ref<'a>(l: *const CphLoop) -> Result<&'a CphLoop, Failure> {
    // SAFETY: a non-NULL handle came from this API and is not freed.
    unsafe { l.as_ref() }.ok_or_else(|| null("loop"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: `out` is non-NULL and writable per the caller's contract.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(CphStatus::Internal, "output contains NUL".into()))?;
    // SAFETY: forwarded from the caller's contract.
    unsafe { write_out(out, c.into_raw()) }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cph_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this API.
///
/// # Safety
/// `s` is NULL or a string from this API not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cph_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` was produced by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses graph JSON into a new handle.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_graph_from_json(json: *const c_char, out: *mut *mut CphGraph) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let text = unsafe { read_str(json, "json") }?;
        let g = parse_graph(text)?;
        let handle = Box::into_raw(Box::new(CphGraph { inner: Arc::new(g) }));
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_out(out, handle) }
    })
}

/// # Safety
/// `g` is NULL or a live graph handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cph_graph_free(g: *mut CphGraph) {
    if !g.is_null() {
        // SAFETY: `g` came from `Box::into_raw` in `cph_graph_from_json`.
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Number of vertices, or 0 for NULL.
///
/// # Safety
/// `g` is NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cph_graph_vertex_count(g: *const CphGraph) -> usize {
    // SAFETY: forwarded from the caller's contract.
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.vertex_count())
}

/// Number of edges, or 0 for NULL.
///
/// # Safety
/// `g` is NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cph_graph_edge_count(g: *const CphGraph) -> usize {
    // SAFETY: forwarded from the caller's contract.
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.edge_count())
}

/// A shortest cycle of the graph.
///
/// # Safety
/// `g` is a live graph handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_shortest_cycle(g: *const CphGraph, out: *mut *mut CphLoop) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let g = unsafe { graph_ref(g) }?;
        let lp = shortest_cycle(&g.inner)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_out(out, Box::into_raw(Box::new(CphLoop { inner: lp }))) }
    })
}

/// The simple cycle on the given edge ids.
///
/// # Safety
/// `g` is a live graph handle; `ids` points to `count` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_loop_from_edge_ids(
    g: *const CphGraph,
    ids: *const u64,
    count: usize,
    out: *mut *mut CphLoop,
) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let g = unsafe { graph_ref(g) }?;
        if ids.is_null() {
            return Err(null("ids"));
        }
        // SAFETY: `ids` holds `count` values per the caller's contract.
        let ids = unsafe { std::slice::from_raw_parts(ids, count) };
        let edges = ids
            .iter()
            .map(|&id| g.inner.edge_index(id).ok_or_else(|| Error::InvalidInput(format!("no edge with id {id}"))))
            .collect::<Result<Vec<_>, Error>>()?;
        let lp = Loop::from_edge_cycle(&g.inner, &edges)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_out(out, Box::into_raw(Box::new(CphLoop { inner: lp }))) }
    })
}

/// # Safety
/// `l` is NULL or a live loop handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cph_loop_free(l: *mut CphLoop) {
    if !l.is_null() {
        // SAFETY: `l` came from `Box::into_raw` in this crate.
        drop(unsafe { Box::from_raw(l) });
    }
}

/// Length of the loop as an exact rational string.
///
/// # Safety
/// `l` is a live loop handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_loop_length(l: *const CphLoop, out: *mut *mut c_char) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let l = unsafe { loop_ref(l) }?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_string(out, l.inner.length().to_string()) }
    })
}

/// Whether the loop is isometrically embedded in the graph.
///
/// # Safety
/// `g`, `l` are live handles with `l` built on `g`; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_is_geodesic_circle(g: *const CphGraph, l: *const CphLoop, out: *mut bool) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let (g, l) = unsafe { (graph_ref(g)?, loop_ref(l)?) };
        let check = is_geodesic_circle(&g.inner, &l.inner)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_out(out, check.is_geodesic) }
    })
}

/// Builds the combing contraction onto `l` and certifies it as a
/// 1-Lipschitz retraction at the given mesh (a rational string).
///
/// # Safety
/// `g`, `l` are live handles with `l` built on `g`; `mesh` is a
/// NUL-terminated string; `certified` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_comb_certify(
    g: *const CphGraph,
    l: *const CphLoop,
    mesh: *const c_char,
    certified: *mut bool,
) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let (g, l) = unsafe { (graph_ref(g)?, loop_ref(l)?) };
        // SAFETY: forwarded from the caller's contract.
        let mesh = unsafe { read_rational(mesh, "mesh") }?;
        let (map, lipschitz) = choose_basepoint(g.inner.clone(), &l.inner, &mesh)?;
        let retraction = verify_retraction(&map, &mesh)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_out(certified, retraction.holds && lipschitz.passes()) }
    })
}

/// Barcode JSON of the Rips filtration of the graph sampled at `mesh`.
///
/// # Safety
/// `g` is a live handle; `mesh` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_barcode_json(
    g: *const CphGraph,
    mesh: *const c_char,
    max_dim: usize,
    field: u32,
    budget: u64,
    out: *mut *mut c_char,
) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let g = unsafe { graph_ref(g) }?;
        // SAFETY: forwarded from the caller's contract.
        let mesh = unsafe { read_rational(mesh, "mesh") }?;
        let space = sample_space(&g.inner, &mesh)?;
        let f = build_rips_filtration_with_budget(&space, max_dim, budget as u128)?;
        let barcode = reduce_persistence(&f, field)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_string(out, barcode.to_json()) }
    })
}

/// Outcome JSON of the winding obstruction search onto `l`.
///
/// # Safety
/// `g`, `l` are live handles with `l` built on `g`; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_obstruction_json(
    g: *const CphGraph,
    l: *const CphLoop,
    bound: u32,
    out: *mut *mut c_char,
) -> CphStatus {
    guard(|| {
        // SAFETY: forwarded from the caller's contract.
        let (g, l) = unsafe { (graph_ref(g)?, loop_ref(l)?) };
        let outcome = winding_obstruction_search(&g.inner, &l.inner, &[], bound)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_string(out, outcome.to_json(&g.inner)) }
    })
}

/// Certificate JSON for the concentric-circles graph.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cph_counterexample_json(bound: u32, out: *mut *mut c_char) -> CphStatus {
    guard(|| {
        let (g, alpha, witness) = build_concentric_counterexample();
        let outcome = winding_obstruction_search(&g, &alpha, &[witness], bound)?;
        // SAFETY: forwarded from the caller's contract.
        unsafe { write_string(out, outcome.to_json(&g)) }
    })
}
