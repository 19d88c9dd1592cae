//! The Harnack path cost `ρ`, its closed-form bounds, the min-average lemma,
//! Harnack inequality checks and heat-kernel bands.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::heat::{HeatPropagator, HeatSolution};
use crate::profiles::{ProfileKind, RateProfile};
use crate::quadrature::adaptive_simpson;
use crate::report::{fmt_float, to_json_string, Emit, Table};

const K_MAX_CAP: usize = 64;
const QUAD_TOL: f64 = 1e-13;

/// The time weight `α` in the path cost.
#[derive(Clone)]
pub enum Alpha {
    Const(f64),
    /// `α(t) = a + b·t`.
    Affine {
        a: f64,
        b: f64,
    },
    Function {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

impl Alpha {
    pub fn function(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function { name: name.into(), f: Arc::new(f) }
    }

    /// `α(t)` of a rate profile at curvature parameter `K`.
    pub fn from_profile(profile: &RateProfile, k: f64, n: f64) -> Self {
        let p = profile.clone();
        Self::function(format!("profile:{}", profile.spec()), move |t| {
            p.alpha_phi(k, n, t).map(|ap| ap.alpha).unwrap_or(f64::NAN)
        })
    }

    pub fn spec(&self) -> String {
        match self {
            Self::Const(c) => format!("const:{c}"),
            Self::Affine { a, b } => format!("affine:{a}:{b}"),
            Self::Function { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Const(c) => *c,
            Self::Affine { a, b } => a + b * t,
            Self::Function { f, .. } => f(t),
        }
    }

    /// `∫_{t0}^{t1} ds ∫_{t0}^{s} α(u) du = ∫_{t0}^{t1} (t1 − u) α(u) du`.
    pub fn segment(&self, t0: f64, t1: f64) -> Result<f64> {
        let h = t1 - t0;
        match self {
            Self::Const(c) => Ok(c * h * h / 2.0),
            Self::Affine { a, b } => Ok(a * h * h / 2.0 + b * h * h / 6.0 * (t1 + 2.0 * t0)),
            Self::Function { f, .. } => {
                let scale = f(0.5 * (t0 + t1)).abs().max(1.0) * h * h;
                adaptive_simpson(|u| (t1 - u) * f(u), t0, t1, QUAD_TOL * scale)
            }
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    /// `const:c` or `affine:a:b`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parse(format!("alpha '{s}' is missing a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("alpha '{s}': {e}")))
        };
        match parts[0] {
            "const" if parts.len() == 2 => Ok(Self::Const(num(1)?)),
            "affine" if parts.len() == 3 => Ok(Self::Affine { a: num(1)?, b: num(2)? }),
            _ => Err(Error::Parse(format!("unknown alpha '{s}' (const:c or affine:a:b)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackRho {
    pub x: usize,
    pub y: usize,
    pub t1: f64,
    pub t2: f64,
    pub alpha: String,
    pub rho: f64,
    pub k_star: usize,
    pub k_max: usize,
    /// `(k, cost(k))` for every feasible walk length examined.
    pub costs: Vec<(usize, f64)>,
}

impl HarnackRho {
    pub fn feasible(&self) -> Vec<usize> {
        self.costs.iter().map(|c| c.0).collect()
    }
}

impl Emit for HarnackRho {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["x", "y", "T1", "T2", "k_star", "rho"]);
        table.push(vec![
            self.x.to_string(),
            self.y.to_string(),
            fmt_float(self.t1),
            fmt_float(self.t2),
            self.k_star.to_string(),
            fmt_float(self.rho),
        ]);
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// `d(x, y) + 2·diam`, capped at 64 but never below `d(x, y)`.
pub fn default_k_max(g: &WeightedGraph, x: usize, y: usize) -> Result<usize> {
    let d = g.distance(x, y).ok_or(Error::Disconnected)?;
    let diam = g.diameter().ok_or(Error::Disconnected)?;
    Ok((d + 2 * diam).min(K_MAX_CAP).max(d))
}

/// `feasible[k]` is true iff a walk of exactly `k` steps joins `x` to `y`.
pub fn walk_lengths(g: &WeightedGraph, x: usize, y: usize, k_max: usize) -> Vec<bool> {
    let nv = g.vertex_count();
    let mut reach = vec![false; nv];
    reach[x] = true;
    let mut feasible = vec![reach[y]];
    for _ in 0..k_max {
        let mut next = vec![false; nv];
        for v in (0..nv).filter(|&v| reach[v]) {
            for &(w, _) in g.neighbors(v) {
                next[w] = true;
            }
        }
        reach = next;
        feasible.push(reach[y]);
    }
    feasible
}

/// `4μ_max k³/(ω_min ΔT³) Σ_i ∫_{t_i}^{t_{i+1}} ds ∫_{t_i}^{s} α` over `k` equal steps.
pub fn rho_cost(alpha: &Alpha, k: usize, t1: f64, t2: f64, mu_max: f64, omega_min: f64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let dt = t2 - t1;
    let h = dt / k as f64;
    let mut sum = 0.0;
    for i in 0..k {
        let a = t1 + i as f64 * h;
        let b = if i + 1 == k { t2 } else { t1 + (i + 1) as f64 * h };
        sum += alpha.segment(a, b)?;
    }
    let kf = k as f64;
    Ok(4.0 * mu_max * kf * kf * kf / (omega_min * dt * dt * dt) * sum)
}

/// `ρ(x, y, T1, T2)` minimized over feasible walk lengths `d(x, y) ≤ k ≤ k_max`.
pub fn rho_compute(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    alpha: &Alpha,
    k_max: Option<usize>,
) -> Result<HarnackRho> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < T1 < T2, got T1 = {t1}, T2 = {t2}")));
    }
    let d = g.distance(x, y).ok_or(Error::Disconnected)?;
    let k_max = match k_max {
        Some(k) => k,
        None => default_k_max(g, x, y)?,
    };
    let feasible = walk_lengths(g, x, y, k_max);
    let b = g.bounds();
    let mut costs = Vec::new();
    for k in d..=k_max {
        if feasible[k] {
            costs.push((k, rho_cost(alpha, k, t1, t2, b.mu_max, b.omega_min)?));
        }
    }
    let &(k_star, rho) = costs
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Precondition(format!("no walk from {x} to {y} of length at most {k_max}")))?;
    Ok(HarnackRho { x, y, t1, t2, alpha: alpha.spec(), rho, k_star, k_max, costs })
}

/// The closed-form upper bounds on `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RemarkBound {
    /// `α = 1 + 2Kt/(1+γ)`, factor `1 + K(T2+T1)/(1+γ)`.
    Power { gamma: f64 },
    /// `α = 1 + (sinh·cosh − Kt)/sinh²`, factor `1 + coth(KT1)`.
    SinhCoth,
    /// Same `α`, logarithmic factor, for `T2 < T1(d+1)`.
    SinhLog,
    /// Same `α`, factor `1 + KT2`, for `KT2 < δ < 1`.
    SinhSmall { delta: f64 },
    /// `α = e^{2Kt/(1+β)}`, for `T2 < (1+β)ln(1+β)/(2K)`.
    ExpBeta { beta: f64 },
}

/// The displayed closed forms, or versions with the missing `1/(T2−T1)`
/// normalization restored (logarithmic and exponential forms only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVariant {
    Displayed,
    Corrected,
}

impl RemarkBound {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Power { .. } => "power",
            Self::SinhCoth => "sinh-coth",
            Self::SinhLog => "sinh-log",
            Self::SinhSmall { .. } => "sinh-small",
            Self::ExpBeta { .. } => "expbeta",
        }
    }

    /// The `α` the bound is stated for.
    pub fn alpha(&self, k: f64) -> Alpha {
        match *self {
            Self::Power { gamma } => Alpha::Affine { a: 1.0, b: 2.0 * k / (1.0 + gamma) },
            Self::SinhCoth | Self::SinhLog | Self::SinhSmall { .. } => Alpha::function("sinh", move |t| {
                let x = k * t;
                if x < 1e-4 {
                    1.0 + 2.0 * x / 3.0 - 2.0 * x.powi(3) / 45.0
                } else {
                    1.0 + (x.sinh() * x.cosh() - x) / (x.sinh() * x.sinh())
                }
            }),
            Self::ExpBeta { beta } => {
                let c = 2.0 * k / (1.0 + beta);
                Alpha::function(format!("expbeta:{beta}"), move |t| (c * t).exp())
            }
        }
    }
}

/// `2μ_max d²/(ω_min(T2−T1))` times the bound's factor.
#[allow(clippy::too_many_arguments)]
pub fn rho_bound_remark(
    bound: RemarkBound,
    variant: BoundVariant,
    k: f64,
    d: usize,
    t1: f64,
    t2: f64,
    mu_max: f64,
    omega_min: f64,
) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidArgument(format!("need 0 < T1 < T2, got T1 = {t1}, T2 = {t2}")));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidArgument("K must be nonnegative".into()));
    }
    let regime = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Precondition(what.to_string())) };
    let dt = t2 - t1;
    let df = d as f64;
    let factor = match bound {
        RemarkBound::Power { gamma } => {
            regime(gamma > 1.0 && gamma < 3.0, "power bound needs 1 < γ < 3")?;
            1.0 + k * (t2 + t1) / (1.0 + gamma)
        }
        RemarkBound::SinhCoth => {
            regime(k > 0.0, "coth bound needs K > 0")?;
            1.0 + 1.0 / (k * t1).tanh()
        }
        RemarkBound::SinhLog => {
            regime(k > 0.0, "log bound needs K > 0")?;
            if d == 0 {
                return Ok(0.0);
            }
            regime(t2 < t1 * (df + 1.0), "log bound needs T2 < T1(d+1)")?;
            let log = ((k * t2).sinh() / (k * (t1 - dt / df)).sinh()).ln() / k;
            match variant {
                BoundVariant::Displayed => 1.0 + log,
                BoundVariant::Corrected => 1.0 + log / dt,
            }
        }
        RemarkBound::SinhSmall { delta } => {
            regime(k > 0.0 && delta > 0.0 && delta < 1.0 && k * t2 < delta, "small-time bound needs 0 < KT2 < δ < 1")?;
            1.0 + k * t2
        }
        RemarkBound::ExpBeta { beta } => {
            regime(beta > 1.0 && beta <= 2.0, "exponential bound needs 1 < β ≤ 2")?;
            regime(k > 0.0, "exponential bound needs K > 0")?;
            regime(
                t2 < (1.0 + beta) * (1.0 + beta).ln() / (2.0 * k),
                "exponential bound needs T2 < (1+β)ln(1+β)/(2K)",
            )?;
            if d == 0 {
                return Ok(0.0);
            }
            let c = 2.0 * k / (1.0 + beta);
            let growth = (c * t2).exp() - (c * t1).exp();
            match variant {
                BoundVariant::Displayed => 1.0 + (dt / df).exp() * growth / c - dt,
                BoundVariant::Corrected => (c * dt / df).exp() * growth / (c * dt),
            }
        }
    };
    Ok(2.0 * mu_max * df * df / (omega_min * dt) * factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Result {
    pub lhs_min: f64,
    pub s_min: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub const LEMMA51_GRID: usize = 400;

/// `min_s (ψ(s) − (1/α(s))∫_s^{T2} ψ²)` on a 400-point grid against
/// `2∫_{T1}^{T2}∫_{T1}^{s} α / (T2−T1)³`.
pub fn lemma51_check(psi: impl Fn(f64) -> f64, alpha: impl Fn(f64) -> f64, t1: f64, t2: f64) -> Result<Lemma51Result> {
    if !(t2 > t1) {
        return Err(Error::InvalidArgument(format!("need T1 < T2, got {t1}, {t2}")));
    }
    let dt = t2 - t1;
    let h = dt / (LEMMA51_GRID - 1) as f64;
    let grid: Vec<f64> =
        (0..LEMMA51_GRID).map(|i| if i + 1 == LEMMA51_GRID { t2 } else { t1 + i as f64 * h }).collect();
    let sq = |t: f64| psi(t) * psi(t);
    let scale = grid.iter().fold(1.0f64, |m, &t| m.max(sq(t))) * dt;
    // Tail integrals accumulated from T2 downwards, one panel at a time.
    let mut tails = vec![0.0; LEMMA51_GRID];
    for i in (0..LEMMA51_GRID - 1).rev() {
        tails[i] = tails[i + 1] + adaptive_simpson(sq, grid[i], grid[i + 1], 1e-14 * scale)?;
    }
    let (mut lhs_min, mut s_min) = (f64::INFINITY, t1);
    for (i, &s) in grid.iter().enumerate() {
        let a = alpha(s);
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("α must be positive, α({s}) = {a}")));
        }
        let v = psi(s) - tails[i] / a;
        if v < lhs_min {
            lhs_min = v;
            s_min = s;
        }
    }
    let a_scale = grid.iter().fold(1.0f64, |m, &t| m.max(alpha(t).abs())) * dt * dt;
    let double = adaptive_simpson(|u| (t2 - u) * alpha(u), t1, t2, 1e-14 * a_scale)?;
    let rhs = 2.0 * double / (dt * dt * dt);
    Ok(Lemma51Result { lhs_min, s_min, rhs, slack: rhs - lhs_min })
}

/// One Harnack form evaluated in the log domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackForm {
    pub form: String,
    /// `ln u(x,T1) − ln u(y,T2)`.
    pub lhs: f64,
    /// Log of the multiplicative factor.
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackCheck {
    pub x: usize,
    pub y: usize,
    pub t1: f64,
    pub t2: f64,
    pub rho: HarnackRho,
    pub forms: Vec<HarnackForm>,
    pub notes: Vec<String>,
}

impl HarnackCheck {
    pub fn form(&self, name: &str) -> Option<&HarnackForm> {
        self.forms.iter().find(|f| f.form == name)
    }
}

/// A batch of Harnack checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub profile: String,
    pub k: f64,
    pub n: f64,
    pub checks: Vec<HarnackCheck>,
}

impl HarnackReport {
    pub fn min_slack(&self, form: &str) -> Option<f64> {
        self.checks.iter().filter_map(|c| c.form(form)).map(|f| f.slack).reduce(f64::min)
    }

    pub fn overall_min_slack(&self) -> Option<f64> {
        self.checks.iter().flat_map(|c| &c.forms).map(|f| f.slack).reduce(f64::min)
    }
}

impl Emit for HarnackReport {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["form", "x", "y", "T1", "T2", "rho", "lhs", "rhs", "slack"]);
        for c in &self.checks {
            for f in &c.forms {
                table.push(vec![
                    f.form.clone(),
                    c.x.to_string(),
                    c.y.to_string(),
                    fmt_float(c.t1),
                    fmt_float(c.t2),
                    fmt_float(c.rho.rho),
                    fmt_float(f.lhs),
                    fmt_float(f.rhs),
                    fmt_float(f.slack),
                ]);
            }
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// `∫_{T1}^{T2} φ/α`, which is `2∫ψ/α` for `ψ = φ/2`.
pub fn phi_over_alpha_integral(profile: &RateProfile, k: f64, n: f64, t1: f64, t2: f64) -> Result<f64> {
    let f = |t: f64| profile.alpha_phi(k, n, t).map(|ap| ap.phi / ap.alpha).unwrap_or(f64::NAN);
    let scale = f(t1).abs().max(f(t2).abs()).max(1.0) * (t2 - t1);
    let v = adaptive_simpson(f, t1, t2, 1e-12 * scale)?;
    if v.is_nan() {
        return Err(Error::ProfileDomain(format!("{} is not defined on [{t1}, {t2}]", profile.spec())));
    }
    Ok(v)
}

fn em1(x: f64) -> f64 {
    // e^{x} − x − 1 without cancellation at small x.
    if x.abs() < 1e-3 {
        x * x / 2.0 * (1.0 + x / 3.0 + x * x / 12.0 + x * x * x / 60.0)
    } else {
        x.exp_m1() - x
    }
}

/// The general exponent form with `ψ = φ/2`, plus each closed-form display
/// whose hypotheses match `(g, profile, K)`.
#[allow(clippy::too_many_arguments)]
pub fn harnack_check(
    sol: &HeatSolution,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    profile: &RateProfile,
    k: f64,
    n: f64,
) -> Result<HarnackCheck> {
    let g = sol.graph();
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidArgument(format!("need 0 < T1 < T2, got T1 = {t1}, T2 = {t2}")));
    }
    let value = |t: f64, v: usize| match sol.time_index(t) {
        Some(j) => sol.value(v, j),
        None => sol.at(t)[v],
    };
    let (ux, uy) = (value(t1, x), value(t2, y));
    if !(ux > 0.0 && uy > 0.0) {
        return Err(Error::NonPositive { vertex: if ux > 0.0 { y } else { x }, value: ux.min(uy) });
    }
    let lhs = ux.ln() - uy.ln();
    let rho = rho_compute(g, x, y, t1, t2, &Alpha::from_profile(profile, k, n), None)?;
    let mut forms = Vec::new();
    let mut notes = Vec::new();
    let general = phi_over_alpha_integral(profile, k, n, t1, t2)? + 2.0 * rho.rho;
    forms.push(HarnackForm { form: "general".into(), lhs, rhs: general, slack: general - lhs });

    if !(g.is_unweighted() && g.has_degree_measure()) {
        notes.push("closed-form displays skipped: they need an unweighted graph with μ = deg".into());
        return Ok(HarnackCheck { x, y, t1, t2, rho, forms, notes });
    }
    let big_d = g.max_degree_count() as f64;
    let d = g.distance(x, y).ok_or(Error::Disconnected)? as f64;
    let dt = t2 - t1;
    let mut push = |name: &str, rhs: f64| forms.push(HarnackForm { form: name.into(), lhs, rhs, slack: rhs - lhs });
    match profile.kind {
        ProfileKind::Power { gamma } if gamma > 1.0 && gamma < 3.0 => {
            let c = 2.0 * k / (1.0 + gamma);
            let rhs = n * gamma * gamma / (4.0 * (gamma - 1.0)) * (t2 / t1).ln()
                - n / (4.0 * (gamma - 1.0)) * ((1.0 + c * t2) / (1.0 + c * t1)).ln()
                + 4.0 * big_d * d * d / dt * (1.0 + k * (t2 + t1) / (1.0 + gamma))
                + n * k / 2.0 * dt;
            push("power", rhs);
        }
        ProfileKind::SinhSq if k > 0.0 => {
            let growth = n / 2.0 * (em1(2.0 * k * t2) / em1(2.0 * k * t1)).ln();
            push("sinh", growth + 4.0 * big_d * d * d / dt * (1.0 + 1.0 / (k * t1).tanh()));
            if k * t2 < 1.0 {
                push("sinh-small", growth + 4.0 * big_d * d * d / dt * (1.0 + k * t2));
            } else {
                notes.push("sinh-small display skipped: needs KT2 < 1".into());
            }
        }
        _ => notes.push(format!("no closed-form display for {} at K = {k}", profile.spec())),
    }
    if k == 0.0 {
        push("zero", n / 2.0 * (t2 / t1).ln() + 4.0 * big_d * d * d / dt);
    }
    Ok(HarnackCheck { x, y, t1, t2, rho, forms, notes })
}

/// `Σ μ(z)` over `d(x, z) ≤ ⌊√t⌋`.
pub fn ball_volume(g: &WeightedGraph, x: usize, t: f64) -> f64 {
    let r = t.sqrt().floor() as usize;
    g.ball(x, r).iter().map(|&z| g.measure(z)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBand {
    pub form: String,
    pub t: Vec<f64>,
    /// `p_t(x,y)/shape(t)`.
    pub ratio: Vec<f64>,
    pub sup: f64,
    pub inf: f64,
}

impl KernelBand {
    fn new(form: &str, t: &[f64], ratio: Vec<f64>) -> Self {
        let sup = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        Self { form: form.into(), t: t.to_vec(), ratio, sup, inf }
    }

    pub fn spread(&self) -> f64 {
        self.sup / self.inf
    }
}

/// `ln p ≥ ln c + ln shape(t) − C3 d²/(t−1)`, fitted by least squares then
/// shifted down so every residual is nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerFit {
    pub shape: String,
    pub c: f64,
    pub c3: f64,
    pub residuals: Vec<f64>,
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub x: usize,
    pub y: usize,
    pub k: f64,
    pub n: f64,
    pub kernel: Vec<f64>,
    pub bands: Vec<KernelBand>,
    pub lower_fit: LowerFit,
    pub notes: Vec<String>,
}

impl KernelReport {
    pub fn band(&self, form: &str) -> Option<&KernelBand> {
        self.bands.iter().find(|b| b.form == form)
    }
}

impl Emit for KernelReport {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["form", "x", "y", "t", "p", "ratio"]);
        for b in &self.bands {
            for (j, (&t, &r)) in b.t.iter().zip(&b.ratio).enumerate() {
                table.push(vec![
                    b.form.clone(),
                    self.x.to_string(),
                    self.y.to_string(),
                    fmt_float(t),
                    fmt_float(self.kernel[j]),
                    fmt_float(r),
                ]);
            }
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// Ratio bands of `p_t(x, y)` against each displayed kernel shape for `t > 1`.
pub fn kernel_bounds_check(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t_grid: &[f64],
    k: f64,
    n: f64,
) -> Result<KernelReport> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 1.0 && t.is_finite())) {
        return Err(Error::InvalidTimeGrid("kernel bounds need every t > 1".into()));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidArgument("K must be nonnegative".into()));
    }
    let prop = HeatPropagator::new(g);
    let kernel = t_grid.iter().map(|&t| prop.heat_kernel(t).map(|p| p.get(x, y))).collect::<Result<Vec<_>>>()?;
    let big_d = g.max_degree_count() as f64;
    let d = g.distance(x, y).ok_or(Error::Disconnected)? as f64;
    let mu_y = g.measure(y);
    let mut notes = Vec::new();
    let mut bands = Vec::new();

    let upper: Vec<f64> = t_grid
        .iter()
        .zip(&kernel)
        .map(|(&t, &p)| p * ball_volume(g, x, t) / mu_y / (3.0 * big_d * k * t + n * k * t / 2.0).exp())
        .collect();
    bands.push(KernelBand::new("upper", t_grid, upper));
    if k > 0.0 {
        let coth: Vec<f64> = t_grid
            .iter()
            .zip(&kernel)
            .map(|(&t, &p)| {
                let growth = (n / 2.0) * (em1(4.0 * k * t) / em1(2.0 * k * t)).ln() + 4.0 * big_d / (k * t).tanh();
                p * ball_volume(g, x, t) / mu_y / growth.exp()
            })
            .collect();
        bands.push(KernelBand::new("upper-coth", t_grid, coth));
    } else {
        notes.push("upper-coth skipped: needs K > 0".into());
    }
    let lower: Vec<f64> = t_grid
        .iter()
        .zip(&kernel)
        .map(|(&t, &p)| {
            let log_shape = -n * k * t / 2.0 - n * t.ln() + n / 4.0 * (1.0 + 2.0 * k * t / 3.0).ln()
                - 4.0 * big_d * d * d / (t - 1.0) * (1.0 + k * (t + 1.0) / 3.0);
            p / log_shape.exp()
        })
        .collect();
    bands.push(KernelBand::new("lower", t_grid, lower));

    let (shape_name, log_shape): (&str, Box<dyn Fn(f64) -> f64>) = if k > 0.0 {
        ("(e^{2Kt}-2Kt-1)^{-n/2}", Box::new(move |t: f64| -n / 2.0 * em1(2.0 * k * t).ln()))
    } else {
        notes.push("lower fit at K = 0 uses the t^{-n} limit shape".into());
        ("t^{-n}", Box::new(move |t: f64| -n * t.ln()))
    };
    let lower_fit = fit_lower(t_grid, &kernel, d, shape_name, log_shape.as_ref());
    Ok(KernelReport { x, y, k, n, kernel, bands, lower_fit, notes })
}

fn fit_lower(t: &[f64], p: &[f64], d: f64, shape: &str, log_shape: &dyn Fn(f64) -> f64) -> LowerFit {
    let target: Vec<f64> = t.iter().zip(p).map(|(&t, &p)| p.ln() - log_shape(t)).collect();
    let reg: Vec<f64> = t.iter().map(|&t| -d * d / (t - 1.0)).collect();
    let m = t.len() as f64;
    let (mean_y, mean_x) = (target.iter().sum::<f64>() / m, reg.iter().sum::<f64>() / m);
    let sxx: f64 = reg.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = reg.iter().zip(&target).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let c3 = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let ln_c0 = mean_y - c3 * mean_x;
    let raw: Vec<f64> = target.iter().zip(&reg).map(|(y, x)| y - ln_c0 - c3 * x).collect();
    let shift = raw.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let residuals: Vec<f64> = raw.iter().map(|r| r - shift).collect();
    let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    LowerFit { shape: shape.into(), c: (ln_c0 + shift).exp(), c3, residuals, min_residual }
}
