//! C interface to `licurv`.
//!
//! Every fallible function returns a [`LicurvStatus`] and writes its result
//! through out-pointers. On failure the message is available from
//! [`licurv_last_error`] on the same thread. Handles are opaque and must be
//! released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use licurv::curvature::{cde_best_k, CdeOptions};
use licurv::error::Error;
use licurv::graph::{generate, Family, MeasureKind, WeightedGraph, Weighting};
use licurv::harnack::{rho_compute, Alpha};
use licurv::heat::HeatSolution;
use licurv::operators::{gamma_all, laplacian_all};
use licurv::profiles::RateProfile;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LicurvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    Precondition = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// A weighted graph with a vertex measure.
pub struct LicurvGraph(WeightedGraph);

/// A heat equation solution sampled on a time grid.
pub struct LicurvHeat(HeatSolution);

/// Regularity constants of a graph.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LicurvBounds {
    pub omega_min: f64,
    pub d_omega: f64,
    pub d_mu: f64,
    pub mu_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> LicurvStatus {
    match err {
        Error::InvalidGraph(_) | Error::Disconnected | Error::ResampleCapExceeded(_) => LicurvStatus::InvalidGraph,
        Error::Precondition(_) | Error::NonPositive { .. } | Error::ProfileDomain(_) => LicurvStatus::Precondition,
        Error::Quadrature { .. } => LicurvStatus::Numerical,
        Error::Io(_) | Error::Json(_) => LicurvStatus::Io,
        _ => LicurvStatus::InvalidArgument,
    }
}

struct Fail(LicurvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LicurvStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LicurvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LicurvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LicurvStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(LicurvStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn graph<'a>(g: *const LicurvGraph) -> Result<&'a WeightedGraph, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn check_len(g: &WeightedGraph, len: usize) -> Result<(), Fail> {
    if len != g.vertex_count() {
        return Err(Error::LengthMismatch { expected: g.vertex_count(), got: len }.into());
    }
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn licurv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a graph from generator specs such as `"torus:2:5"`, `"unit"`, `"degree"`.
#[no_mangle]
pub unsafe extern "C" fn licurv_graph_generate(
    family: *const c_char,
    weights: *const c_char,
    measure: *const c_char,
    out: *mut *mut LicurvGraph,
) -> LicurvStatus {
    guard(|| {
        let family: Family = text(family, "family")?.parse()?;
        let weights: Weighting = text(weights, "weights")?.parse()?;
        let measure: MeasureKind = text(measure, "measure")?.parse()?;
        let g = generate(family, weights, measure)?;
        put(out, Box::into_raw(Box::new(LicurvGraph(g))), "out")
    })
}

/// Parses the graph JSON format `{vertices, edges, measure}`.
#[no_mangle]
pub unsafe extern "C" fn licurv_graph_from_json(json: *const c_char, out: *mut *mut LicurvGraph) -> LicurvStatus {
    guard(|| {
        let g = WeightedGraph::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(LicurvGraph(g))), "out")
    })
}

/// Writes the graph as JSON; free the string with [`licurv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn licurv_graph_to_json(g: *const LicurvGraph, out: *mut *mut c_char) -> LicurvStatus {
    guard(|| {
        let json = graph(g)?.to_json()?;
        let s = CString::new(json).map_err(|_| Fail(LicurvStatus::Io, "interior nul".into()))?;
        put(out, s.into_raw(), "out")
    })
}

/// Vertex count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn licurv_graph_vertex_count(g: *const LicurvGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

#[no_mangle]
pub unsafe extern "C" fn licurv_graph_bounds(g: *const LicurvGraph, out: *mut LicurvBounds) -> LicurvStatus {
    guard(|| {
        let b = graph(g)?.bounds();
        let b = LicurvBounds { omega_min: b.omega_min, d_omega: b.d_omega, d_mu: b.d_mu, mu_max: b.mu_max };
        put(out, b, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn licurv_graph_free(g: *mut LicurvGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `out[x] = Δf(x)`; all arrays have one entry per vertex.
#[no_mangle]
pub unsafe extern "C" fn licurv_laplacian(
    g: *const LicurvGraph,
    f: *const f64,
    len: usize,
    out: *mut f64,
) -> LicurvStatus {
    guard(|| {
        let g = graph(g)?;
        check_len(g, len)?;
        let v = laplacian_all(g, input(f, len, "f")?);
        output(out, len, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// `out[x] = Γ(f, h)(x)`.
#[no_mangle]
pub unsafe extern "C" fn licurv_gamma(
    g: *const LicurvGraph,
    f: *const f64,
    h: *const f64,
    len: usize,
    out: *mut f64,
) -> LicurvStatus {
    guard(|| {
        let g = graph(g)?;
        check_len(g, len)?;
        let v = gamma_all(g, input(f, len, "f")?, input(h, len, "h")?);
        output(out, len, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Solves `∂_t u = Δu` from `u0` and samples it at the increasing `times`.
#[no_mangle]
pub unsafe extern "C" fn licurv_heat_evolve(
    g: *const LicurvGraph,
    u0: *const f64,
    len: usize,
    times: *const f64,
    time_count: usize,
    out: *mut *mut LicurvHeat,
) -> LicurvStatus {
    guard(|| {
        let g = graph(g)?;
        check_len(g, len)?;
        let sol = licurv::heat::evolve(g, input(u0, len, "u0")?, input(times, time_count, "times")?)?;
        put(out, Box::into_raw(Box::new(LicurvHeat(sol))), "out")
    })
}

/// Copies `u(·, times[j])` into `out`, which holds one entry per vertex.
#[no_mangle]
pub unsafe extern "C" fn licurv_heat_slice(h: *const LicurvHeat, j: usize, out: *mut f64, len: usize) -> LicurvStatus {
    guard(|| {
        let sol = &h.as_ref().ok_or_else(|| null("heat"))?.0;
        if j >= sol.times().len() {
            return Err(Fail(LicurvStatus::InvalidArgument, format!("time index {j} out of range")));
        }
        check_len(sol.graph(), len)?;
        output(out, len, "out")?.copy_from_slice(sol.slice(j));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn licurv_heat_free(h: *mut LicurvHeat) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `α(t)` and `φ(t)` for a rate profile spec such as `"power:2"` or `"sinh2"`.
#[no_mangle]
pub unsafe extern "C" fn licurv_alpha_phi(
    profile: *const c_char,
    k: f64,
    n: f64,
    t: f64,
    alpha: *mut f64,
    phi: *mut f64,
) -> LicurvStatus {
    guard(|| {
        let profile: RateProfile = text(profile, "profile")?.parse()?;
        let ap = profile.alpha_phi(k, n, t)?;
        put(alpha, ap.alpha, "alpha")?;
        put(phi, ap.phi, "phi")
    })
}

/// Largest `K` with `CDE(n, K)` at `x`, found by multistart search. Pass
/// `n = INFINITY` for the dimension-free condition.
#[no_mangle]
pub unsafe extern "C" fn licurv_cde_best_k(
    g: *const LicurvGraph,
    x: usize,
    n: f64,
    restarts: usize,
    seed: u64,
    k_star: *mut f64,
) -> LicurvStatus {
    guard(|| {
        let opts = CdeOptions { restarts, seed, ..CdeOptions::default() };
        let v = cde_best_k(graph(g)?, x, n, &opts)?;
        put(k_star, v.k_star, "k_star")
    })
}

/// Minimal walk cost between `(x, t1)` and `(y, t2)`. `alpha` is `"const:C"`
/// or `"affine:A:B"`; `k_max = 0` picks the default walk length cap.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn licurv_rho(
    g: *const LicurvGraph,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    alpha: *const c_char,
    k_max: usize,
    rho: *mut f64,
    k_star: *mut usize,
) -> LicurvStatus {
    guard(|| {
        let alpha: Alpha = text(alpha, "alpha")?.parse()?;
        let r = rho_compute(graph(g)?, x, y, t1, t2, &alpha, (k_max > 0).then_some(k_max))?;
        put(rho, r.rho, "rho")?;
        put(k_star, r.k_star, "k_star")
    })
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn licurv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
