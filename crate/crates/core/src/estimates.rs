//! Verifiers for the gradient estimates on solved heat trajectories.
//!
//! Nothing here proves anything: each check evaluates both sides of an
//! inequality on a grid and records the slack `rhs − lhs`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::{strong_cutoff_verify, CutoffFunction, CutoffKind};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::heat::{HeatPropagator, HeatSolution};
use crate::operators::{gamma, gamma2_tilde, gamma_with, laplacian, laplacian_all, laplacian_with};
use crate::profiles::RateProfile;
use crate::report::{fmt_float, to_json_string, Emit, Table};

/// `Δ√u < S_T_THRESHOLD` defines the set `S_T`.
pub const S_T_THRESHOLD: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub vertex: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub parameters: BTreeMap<String, String>,
    pub rows: Vec<InequalityRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub inequality: String,
    pub parameters: BTreeMap<String, String>,
    pub rows: usize,
    pub min_slack: Option<f64>,
    pub min_vertex: Option<usize>,
    pub min_t: Option<f64>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(inequality: impl Into<String>) -> Self {
        Self { inequality: inequality.into(), parameters: BTreeMap::new(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, vertex: usize, t: f64, lhs: f64, rhs: f64) {
        self.rows.push(InequalityRow { vertex, t, lhs, rhs, slack: rhs - lhs });
    }

    pub fn argmin(&self) -> Option<&InequalityRow> {
        self.rows.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.argmin().map(|r| r.slack)
    }

    /// True when every slack is at least `threshold` (vacuously for no rows).
    pub fn passed(&self, threshold: f64) -> bool {
        self.rows.iter().all(|r| r.slack >= threshold)
    }

    pub fn summary(&self) -> ReportSummary {
        let min = self.argmin();
        ReportSummary {
            inequality: self.inequality.clone(),
            parameters: self.parameters.clone(),
            rows: self.rows.len(),
            min_slack: min.map(|r| r.slack),
            min_vertex: min.map(|r| r.vertex),
            min_t: min.map(|r| r.t),
            notes: self.notes.clone(),
        }
    }
}

impl Emit for InequalityReport {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["inequality", "vertex", "t", "lhs", "rhs", "slack"]);
        for r in &self.rows {
            table.push(vec![
                self.inequality.clone(),
                r.vertex.to_string(),
                fmt_float(r.t),
                fmt_float(r.lhs),
                fmt_float(r.rhs),
                fmt_float(r.slack),
            ]);
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(&self.summary())
    }
}

/// `Γ(√u)` and `Δu` at every vertex of one slice.
struct SliceData {
    gamma_sqrt: Vec<f64>,
    lap: Vec<f64>,
}

fn slice_data(g: &WeightedGraph, u: &[f64]) -> Result<SliceData> {
    if let Some(x) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositive { vertex: x, value: u[x] });
    }
    let root: Vec<f64> = u.iter().map(|v| v.sqrt()).collect();
    let gamma_sqrt = (0..g.vertex_count()).map(|x| gamma(g, &root, &root, x)).collect();
    Ok(SliceData { gamma_sqrt, lap: laplacian_all(g, u) })
}

fn positive_times(sol: &HeatSolution) -> Vec<usize> {
    (0..sol.times().len()).filter(|&j| sol.times()[j] > 0.0).collect()
}

fn base_params(report: InequalityReport, profile: &RateProfile, k: f64, n: f64) -> InequalityReport {
    report.param("profile", profile.spec()).param("K", k).param("n", n)
}

/// `Γ(√u)/u − α ∂_t√u/√u ≤ φ/2` at every vertex and positive grid time.
pub fn liyau_global_check(sol: &HeatSolution, profile: &RateProfile, k: f64, n: f64) -> Result<InequalityReport> {
    let g = sol.graph();
    let mut report = base_params(InequalityReport::new("liyau-global"), profile, k, n);
    if sol.times().first() == Some(&0.0) {
        report.notes.push("t = 0 skipped".into());
    }
    let rows = positive_times(sol)
        .into_par_iter()
        .map(|j| -> Result<Vec<InequalityRow>> {
            let t = sol.times()[j];
            let u = sol.slice(j);
            let d = slice_data(g, u)?;
            let ap = profile.alpha_phi(k, n, t)?;
            Ok((0..g.vertex_count())
                .map(|x| {
                    let lhs = d.gamma_sqrt[x] / u[x] - ap.alpha * d.lap[x] / (2.0 * u[x]);
                    let rhs = 0.5 * ap.phi;
                    InequalityRow { vertex: x, t, lhs, rhs, slack: rhs - lhs }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    report.rows = rows.into_iter().flatten().collect();
    Ok(report)
}

/// The local estimate on `B(x0, R)`: the global right side plus
/// `nD_μ(1+D_ω)α²η/(Rβ)`.
pub fn liyau_local_check(
    sol: &HeatSolution,
    profile: &RateProfile,
    k: f64,
    n: f64,
    x0: usize,
    radius: usize,
) -> Result<InequalityReport> {
    let g = sol.graph();
    g.check_vertex(x0)?;
    if radius == 0 {
        return Err(Error::InvalidArgument("R must be at least 1".into()));
    }
    if profile.beta.is_none() {
        return Err(Error::Missing(format!("{} carries no Condition A β", profile.spec())));
    }
    let b = g.bounds();
    let ball = g.ball(x0, radius);
    let mut report =
        base_params(InequalityReport::new("liyau-local"), profile, k, n).param("x0", x0).param("R", radius);
    let r = radius as f64;
    for j in positive_times(sol) {
        let t = sol.times()[j];
        let u = sol.slice(j);
        let d = slice_data(g, u)?;
        let ap = profile.alpha_phi(k, n, t)?;
        let (beta, _) = profile.beta(t, k)?;
        let eta = profile.eta(t, k)?;
        let extra = local_extra(n, b.d_mu, b.d_omega, r, ap.alpha, eta, beta);
        for &x in &ball {
            let lhs = d.gamma_sqrt[x] / u[x] - ap.alpha * d.lap[x] / (2.0 * u[x]);
            report.push(x, t, lhs, 0.5 * ap.phi + extra);
        }
    }
    Ok(report)
}

/// `nD_μ(1+D_ω)α²η/(Rβ)`.
pub fn local_extra(n: f64, d_mu: f64, d_omega: f64, r: f64, alpha: f64, eta: f64, beta: f64) -> f64 {
    n * d_mu * (1.0 + d_omega) * alpha * alpha * eta / (r * beta)
}

/// The two added terms of the strong cut-off estimate,
/// `ncD_μ(1+R√K)α²η/(R²β)` and `cn²D_μ(1+D_ω)²α⁴η̃/(4R²β)`.
#[allow(clippy::too_many_arguments)]
pub fn strong_local_terms(
    n: f64,
    c: f64,
    d_mu: f64,
    d_omega: f64,
    r: f64,
    k: f64,
    alpha: f64,
    eta: f64,
    eta_tilde: f64,
    beta: f64,
) -> (f64, f64) {
    let first = n * c * d_mu * (1.0 + r * k.sqrt()) * alpha * alpha * eta / (r * r * beta);
    let second = c * n * n * d_mu * (1.0 + d_omega).powi(2) * alpha.powi(4) * eta_tilde / (4.0 * r * r * beta);
    (first, second)
}

/// The strong cut-off estimate at `x0` only. Requires the cut-off to pass
/// verification and Condition B to hold up to the last grid time.
pub fn liyau_strong_local_check(
    sol: &HeatSolution,
    profile: &RateProfile,
    k: f64,
    n: f64,
    phi: &CutoffFunction,
    c: f64,
) -> Result<InequalityReport> {
    let g = sol.graph();
    if !(k > 0.0) {
        return Err(Error::Precondition("the strong cut-off estimate needs K > 0 (Condition B)".into()));
    }
    let c = match phi.kind {
        CutoffKind::Strong { c, .. } => c,
        CutoffKind::Basic => c,
    };
    let cut = strong_cutoff_verify(g, phi, n, k, c)?;
    if let Some(v) = cut.violation {
        return Err(Error::Precondition(format!("cut-off fails the strong conditions: {v:?}")));
    }
    let t_end = *sol.times().last().expect("nonempty grid");
    let cond = profile.condition_b_check(k, t_end)?;
    if !cond.passed {
        return Err(Error::Precondition(format!("Condition B fails: {cond:?}")));
    }
    let b = g.bounds();
    let x0 = phi.center;
    let r = phi.radius as f64;
    let mut report = base_params(InequalityReport::new("liyau-strong-local"), profile, k, n)
        .param("x0", x0)
        .param("R", phi.radius)
        .param("c", c);
    for j in positive_times(sol) {
        let t = sol.times()[j];
        let u = sol.slice(j);
        let d = slice_data(g, u)?;
        let ap = profile.alpha_phi(k, n, t)?;
        let (beta, _) = profile.beta(t, k)?;
        let eta = profile.eta(t, k)?;
        let eta_tilde = profile.eta_tilde(t, k)?;
        let (first, second) = strong_local_terms(n, c, b.d_mu, b.d_omega, r, k, ap.alpha, eta, eta_tilde, beta);
        let lhs = d.gamma_sqrt[x0] / u[x0] - ap.alpha * d.lap[x0] / (2.0 * u[x0]);
        report.push(x0, t, lhs, 0.5 * ap.phi + first + second);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diff1Residual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Largest magnitude among the terms on either side.
    pub scale: f64,
}

/// Everything about `uH` and `(Δ − ∂_t)(uH)` on one time slice.
struct UhSlice {
    uh: Vec<f64>,
    heat_op: Vec<f64>,
    rhs: Vec<f64>,
    lhs_scale: Vec<f64>,
    rhs_scale: Vec<f64>,
}

/// `uH = a(2Γ(√u) − αΔu − φu)`. The left side `(Δ − ∂_t)(uH)` takes `Δ` of
/// the slice and `∂_t` term by term through `∂_t u = Δu`,
/// `∂_tΓ(√u) = 2Γ(√u, Δu/(2√u))`, and `α'`, `φ'`; the right side is
/// `4aΓ̃₂(√u) + (aα)'Δu − 2a'Γ(√u) + (aφ)'u`.
fn uh_slice(g: &WeightedGraph, u: &[f64], profile: &RateProfile, k: f64, n: f64, t: f64) -> Result<UhSlice> {
    let d = slice_data(g, u)?;
    let ap = profile.alpha_phi(k, n, t)?;
    let (d_alpha, d_phi) = profile.alpha_phi_derivatives(k, n, t)?;
    let h = profile.h_coefficients(k, n, t)?;
    let (a, da) = (h.a, h.da);
    let nv = g.vertex_count();
    let root: Vec<f64> = u.iter().map(|v| v.sqrt()).collect();
    let lap_lap = laplacian_all(g, &d.lap);
    let q: Vec<f64> = (0..nv).map(|y| d.lap[y] / (2.0 * root[y])).collect();

    let bracket: Vec<f64> = (0..nv).map(|y| 2.0 * d.gamma_sqrt[y] - ap.alpha * d.lap[y] - ap.phi * u[y]).collect();
    let uh: Vec<f64> = bracket.iter().map(|b| a * b).collect();
    let mut heat_op = Vec::with_capacity(nv);
    let mut rhs = Vec::with_capacity(nv);
    let mut lhs_scale = Vec::with_capacity(nv);
    let mut rhs_scale = Vec::with_capacity(nv);
    for x in 0..nv {
        let lap_uh = laplacian(g, &uh, x);
        let gamma_q = gamma_with(g, x, |y| root[y], |y| q[y]);
        let inner = [4.0 * gamma_q, -d_alpha * d.lap[x], -ap.alpha * lap_lap[x], -d_phi * u[x], -ap.phi * d.lap[x]];
        let dt_uh = da * bracket[x] + a * inner.iter().sum::<f64>();
        heat_op.push(lap_uh - dt_uh);
        let terms = [
            4.0 * a * gamma2_tilde(g, &root, x)?,
            h.d_a_alpha * d.lap[x],
            -2.0 * da * d.gamma_sqrt[x],
            h.d_a_phi * u[x],
        ];
        rhs.push(terms.iter().sum());
        let lhs_mag = inner.iter().map(|v| (a * v).abs()).fold((da * bracket[x]).abs(), f64::max).max(lap_uh.abs());
        lhs_scale.push(lhs_mag);
        rhs_scale.push(terms.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    Ok(UhSlice { uh, heat_op, rhs, lhs_scale, rhs_scale })
}

/// Both sides of the evolution identity for `uH` at `(x, t)`.
pub fn lemma_diff1_residual(
    sol: &HeatSolution,
    profile: &RateProfile,
    k: f64,
    n: f64,
    x: usize,
    t: f64,
) -> Result<Diff1Residual> {
    let g = sol.graph();
    g.check_vertex(x)?;
    let u = match sol.time_index(t) {
        Some(j) => sol.slice(j).to_vec(),
        None => sol.at(t),
    };
    let s = uh_slice(g, &u, profile, k, n, t)?;
    Ok(Diff1Residual {
        lhs: s.heat_op[x],
        rhs: s.rhs[x],
        residual: s.heat_op[x] - s.rhs[x],
        scale: s.lhs_scale[x].max(s.rhs_scale[x]),
    })
}

/// On `S_T`, `(Δ−∂_t)(uH) ≥ (au/n)((2Γ(√u) − Δu)/u − na'/(2a) − nK)²`.
/// Rows carry the bound as `lhs` and `(Δ−∂_t)(uH)` as `rhs`.
pub fn uh_growth_check(sol: &HeatSolution, profile: &RateProfile, k: f64, n: f64) -> Result<InequalityReport> {
    let g = sol.graph();
    let kk = profile.notation_k(k);
    let mut report = base_params(InequalityReport::new("uh-growth"), profile, k, n);
    for j in positive_times(sol) {
        let t = sol.times()[j];
        let u = sol.slice(j);
        let s = uh_slice(g, u, profile, k, n, t)?;
        let d = slice_data(g, u)?;
        let (a, da) = profile.eval(t, k)?;
        let root: Vec<f64> = u.iter().map(|v| v.sqrt()).collect();
        for x in 0..g.vertex_count() {
            if laplacian(g, &root, x) >= S_T_THRESHOLD {
                continue;
            }
            let inner = (2.0 * d.gamma_sqrt[x] - d.lap[x]) / u[x] - n * da / (2.0 * a) - n * kk;
            report.push(x, t, a * u[x] / n * inner * inner, s.heat_op[x]);
        }
    }
    Ok(report)
}

/// Hamilton's estimate with `A = max u0` (maximum principle), in both forms:
/// `((1+2Kt)√A/t)√u` and `(1/t + max(2K, D_μ))√A√u` added to `½|Δu|`.
pub fn hamilton_check(sol: &HeatSolution, k: f64) -> Result<(InequalityReport, InequalityReport)> {
    let g = sol.graph();
    let big_a = sol.initial().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d_mu = g.bounds().d_mu;
    let mut main = InequalityReport::new("hamilton").param("K", k).param("A", big_a);
    let mut variant = InequalityReport::new("hamilton-dmu").param("K", k).param("A", big_a).param("D_mu", d_mu);
    for j in positive_times(sol) {
        let t = sol.times()[j];
        let u = sol.slice(j);
        let d = slice_data(g, u)?;
        for x in 0..g.vertex_count() {
            let base = 0.5 * d.lap[x].abs();
            let su = big_a.sqrt() * u[x].sqrt();
            main.push(x, t, d.gamma_sqrt[x], base + (1.0 + 2.0 * k * t) / t * su);
            variant.push(x, t, d.gamma_sqrt[x], base + (1.0 / t + (2.0 * k).max(d_mu)) * su);
        }
    }
    Ok((main, variant))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLaplacianPoint {
    pub vertex: usize,
    pub t: f64,
    pub laplacian: f64,
    /// `Δ|Δu| − ∂_t|Δu|`, time derivative by centered difference on the grid.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLemmaReport {
    pub tol: f64,
    pub screened: Vec<ZeroLaplacianPoint>,
    pub violations: usize,
}

impl ZeroLemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Screens interior grid points with `|Δu| ≤ tol·max(1, max|u|)` and
/// evaluates `(Δ − ∂_t)|Δu|` there; values below `-1e-6` are violations.
pub fn lemma_zero_check(sol: &HeatSolution, tol: f64) -> Result<ZeroLemmaReport> {
    let g = sol.graph();
    let times = sol.times();
    let abs_lap: Vec<Vec<f64>> =
        (0..times.len()).map(|j| sol.laplacian_slice(j).iter().map(|v| v.abs()).collect()).collect();
    let mut report = ZeroLemmaReport { tol, screened: Vec::new(), violations: 0 };
    for j in 1..times.len().saturating_sub(1) {
        let scale = sol.slice(j).iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let dt = times[j + 1] - times[j - 1];
        for x in 0..g.vertex_count() {
            let lap = sol.laplacian_slice(j)[x];
            if lap.abs() > tol * scale {
                continue;
            }
            let spatial = laplacian(g, &abs_lap[j], x);
            let temporal = (abs_lap[j + 1][x] - abs_lap[j - 1][x]) / dt;
            let value = spatial - temporal;
            if value < -1e-6 {
                report.violations += 1;
            }
            report.screened.push(ZeroLaplacianPoint { vertex: x, t: times[j], laplacian: lap, value });
        }
    }
    Ok(report)
}

/// Values on `V × grid`, one `Vec` per time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// `(Δ − ∂_t)F` when known exactly; otherwise estimated from the grid.
    pub heat_operator: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxPrincipleMode {
    Weak,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub mode: MaxPrincipleMode,
    /// The differential hypothesis holds at every masked cell.
    pub hypothesis_holds: bool,
    pub hypothesis_failures: usize,
    /// Smallest `(Δ − ∂_t)F` over masked cells.
    pub min_heat_operator: f64,
    pub max_value: f64,
    /// First cell with `F > tol` while the hypothesis holds.
    pub witness: Option<(usize, f64)>,
}

impl MaxPrincipleReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

const MAX_PRINCIPLE_TOL: f64 = 1e-9;

/// Checks that `F ≤ 0` wherever the conditional maximum principle applies.
/// Errors when `F(·, t_0) ≤ 0` or `F ≤ 0` off the mask fails.
pub fn max_principle_check(
    g: &WeightedGraph,
    field: &SpaceTimeField,
    mask: &[Vec<bool>],
    mode: MaxPrincipleMode,
) -> Result<MaxPrincipleReport> {
    let nv = g.vertex_count();
    let m = field.times.len();
    if m == 0 || field.values.len() != m || mask.len() != m {
        return Err(Error::InvalidArgument("field, mask and times must have the same length".into()));
    }
    if field.values.iter().chain(mask.iter().map(|_| &field.values[0])).any(|s| s.len() != nv)
        || mask.iter().any(|s| s.len() != nv)
    {
        return Err(Error::LengthMismatch { expected: nv, got: field.values[0].len() });
    }
    let scale = field.values.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = MAX_PRINCIPLE_TOL * scale;
    if let Some(x) = (0..nv).find(|&x| field.values[0][x] > tol) {
        return Err(Error::Precondition(format!("F(x, t0) > 0 at vertex {x}")));
    }
    for j in 0..m {
        if let Some(x) = (0..nv).find(|&x| !mask[j][x] && field.values[j][x] > tol) {
            return Err(Error::Precondition(format!("F > 0 off the mask at vertex {x}, t = {}", field.times[j])));
        }
    }
    let heat_op = match &field.heat_operator {
        Some(h) => h.clone(),
        None => estimate_heat_operator(g, field),
    };
    let mut report = MaxPrincipleReport {
        mode,
        hypothesis_holds: true,
        hypothesis_failures: 0,
        min_heat_operator: f64::INFINITY,
        max_value: field.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max),
        witness: None,
    };
    for j in 0..m {
        for x in 0..nv {
            if !mask[j][x] {
                continue;
            }
            let h = heat_op[j][x];
            report.min_heat_operator = report.min_heat_operator.min(h);
            let ok = match mode {
                MaxPrincipleMode::Weak => h >= -tol,
                MaxPrincipleMode::Strict => h > 0.0,
            };
            if !ok {
                report.hypothesis_holds = false;
                report.hypothesis_failures += 1;
            }
        }
    }
    if report.hypothesis_holds {
        'outer: for j in 0..m {
            for x in 0..nv {
                if field.values[j][x] > tol {
                    report.witness = Some((x, field.times[j]));
                    break 'outer;
                }
            }
        }
    }
    Ok(report)
}

fn estimate_heat_operator(g: &WeightedGraph, field: &SpaceTimeField) -> Vec<Vec<f64>> {
    let m = field.times.len();
    (0..m)
        .map(|j| {
            let lap = laplacian_all(g, &field.values[j]);
            let (lo, hi) = (j.saturating_sub(1), (j + 1).min(m - 1));
            let dt = field.times[hi] - field.times[lo];
            lap.iter()
                .zip(field.values[hi].iter().zip(&field.values[lo]))
                .map(|(l, (a, b))| if dt > 0.0 { l - (a - b) / dt } else { *l })
                .collect()
        })
        .collect()
}

/// `F = uH` on the solution's positive grid times with its exact heat
/// operator, and the mask `S_T = {Δ√u < -1e-12}`.
pub fn uh_field(sol: &HeatSolution, profile: &RateProfile, k: f64, n: f64) -> Result<(SpaceTimeField, Vec<Vec<bool>>)> {
    let g = sol.graph();
    let mut field = SpaceTimeField { times: Vec::new(), values: Vec::new(), heat_operator: Some(Vec::new()) };
    let mut mask = Vec::new();
    for j in positive_times(sol) {
        let t = sol.times()[j];
        let u = sol.slice(j);
        let s = uh_slice(g, u, profile, k, n, t)?;
        let root: Vec<f64> = u.iter().map(|v| v.sqrt()).collect();
        mask.push((0..g.vertex_count()).map(|x| laplacian_with(g, x, |y| root[y]) < S_T_THRESHOLD).collect());
        field.times.push(t);
        field.values.push(s.uh);
        field.heat_operator.as_mut().expect("set above").push(s.heat_op);
    }
    Ok((field, mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiouvilleKind {
    /// Positive harmonic functions under `CDE(n, 0)`.
    FiniteN,
    /// Bounded positive harmonic functions under `CDE(∞, 0)`.
    InfiniteN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub kind: LiouvilleKind,
    pub kernel_dimension: usize,
    /// `ℓ²(μ)`-orthonormal kernel basis, one vector per element.
    pub basis: Vec<Vec<f64>>,
    /// Largest `|Δv|` over the basis.
    pub residual: f64,
    pub passed: bool,
}

/// Passes iff the kernel of `Δ` is exactly the constants.
pub fn liouville_check(g: &WeightedGraph, kind: LiouvilleKind) -> Result<LiouvilleReport> {
    let prop = HeatPropagator::new(g);
    let basis_matrix = prop.mu_orthonormal_basis();
    let lambda = prop.eigenvalues();
    let spread = lambda.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let mut basis = Vec::new();
    for (i, l) in lambda.iter().enumerate() {
        if l.abs() <= 1e-10 * spread {
            let mut v: Vec<f64> = basis_matrix.column(i).iter().copied().collect();
            if v.iter().sum::<f64>() < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            basis.push(v);
        }
    }
    let residual =
        basis.iter().map(|v| laplacian_all(g, v).iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(0.0, f64::max);
    let constant = basis.len() == 1 && {
        let v = &basis[0];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().all(|x| (x - mean).abs() <= 1e-10 * mean.abs().max(1e-300))
    };
    Ok(LiouvilleReport { kind, kernel_dimension: basis.len(), basis, residual, passed: constant && residual <= 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, MeasureKind, Weighting};
    use crate::heat::{evolve, log_grid};

    #[test]
    fn constant_solution_has_full_slack() {
        let g = generate(Family::Cycle(5), Weighting::Unit, MeasureKind::Unit).unwrap();
        let sol = evolve(&g, &[2.0; 5], &log_grid(0.1, 2.0, 5).unwrap()).unwrap();
        let p = RateProfile::power(2.0).unwrap();
        let report = liyau_global_check(&sol, &p, 0.0, 2.0).unwrap();
        for r in &report.rows {
            assert!(r.lhs.abs() < 1e-14);
            assert!((r.slack - p.alpha_phi(0.0, 2.0, r.t).unwrap().phi / 2.0).abs() < 1e-12);
        }
        let (h, v) = hamilton_check(&sol, 0.0).unwrap();
        assert!(h.rows.iter().chain(&v.rows).all(|r| r.lhs.abs() < 1e-14 && r.slack > 0.0));
    }

    #[test]
    fn liouville_on_path2_and_union() {
        let g = generate(Family::Path(2), Weighting::Unit, MeasureKind::Unit).unwrap();
        let r = liouville_check(&g, LiouvilleKind::FiniteN).unwrap();
        assert!(r.passed);
        let s = 0.5f64.sqrt();
        assert!(r.basis[0].iter().all(|v| (v - s).abs() < 1e-12));
        let c = generate(Family::Cycle(5), Weighting::Unit, MeasureKind::Unit).unwrap();
        let r = liouville_check(&c.disjoint_union(&c), LiouvilleKind::InfiniteN).unwrap();
        assert_eq!(r.kernel_dimension, 2);
        assert!(!r.passed);
    }

    #[test]
    fn zero_field_passes_and_bad_boundary_is_rejected() {
        let g = generate(Family::Path(3), Weighting::Unit, MeasureKind::Unit).unwrap();
        let times = vec![0.0, 0.5, 1.0];
        let zero = SpaceTimeField { times: times.clone(), values: vec![vec![0.0; 3]; 3], heat_operator: None };
        let mask = vec![vec![true; 3]; 3];
        assert!(max_principle_check(&g, &zero, &mask, MaxPrincipleMode::Weak).unwrap().passed());
        let plus_t = SpaceTimeField {
            times: times.clone(),
            values: times.iter().map(|&t| vec![t; 3]).collect(),
            heat_operator: None,
        };
        let off = vec![vec![false; 3]; 3];
        assert!(matches!(max_principle_check(&g, &plus_t, &off, MaxPrincipleMode::Weak), Err(Error::Precondition(_))));
    }

    #[test]
    fn strong_terms_scale() {
        let (a1, b1) = strong_local_terms(3.0, 2.0, 1.0, 4.0, 2.0, 0.0, 1.3, 0.7, 1.5, 0.4);
        let (a2, b2) = strong_local_terms(3.0, 2.0, 1.0, 4.0, 4.0, 0.0, 1.3, 0.7, 1.5, 0.4);
        assert!(((a2 + b2) / (a1 + b1) - 0.25).abs() < 1e-12);
    }
}
