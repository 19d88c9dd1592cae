//! Rate functions `a(t)` and the quantities built from them: `α`, `φ`, the
//! assumption checks, and the auxiliary `β`, `η`, `η̃` of the local estimates.
//!
//! Everything is expressed through three ratios that stay finite where `a`
//! itself under- or overflows: `a'/a`, `A/a` and `B/a`, with `A = ∫₀ᵗ a` and
//! `B = ∫₀ᵗ a'²/a`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::log_grid;
use crate::quadrature::integrate_from_zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// `a = e^{-ct}(1 − e^{-ct})^β`, for nonpositive curvature.
    Minus,
    /// `a = e^{ct}(e^{ct} − 1)^β`, for `CDE(n, K)` with `K ≥ 0`.
    Plus,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileKind {
    /// `t^γ`, `γ > 1`.
    Power { gamma: f64 },
    /// `t² + γt³`, `γ ≥ 0`.
    PowerCubic { gamma: f64 },
    /// `sinh²(Kt)`.
    SinhSq,
    /// `(e^{γKt} − 1)²`, `γ ≠ 0`.
    ExpSq { gamma: f64 },
    /// `e^{∓ct}(±(1 − e^{∓ct}))^β` with `c = 2K/(1+β)`, `β > 1`.
    ExpBeta { beta: f64, sign: Sign },
    /// User supplied `a` and `a'`, independent of `K`.
    Custom { name: String, a: ScalarFn, da: ScalarFn },
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

impl ProfileKind {
    pub fn spec(&self) -> String {
        match self {
            Self::Power { gamma } => format!("power:{gamma}"),
            Self::PowerCubic { gamma } => format!("powercubic:{gamma}"),
            Self::SinhSq => "sinh2".into(),
            Self::ExpSq { gamma } => format!("expsq:{gamma}"),
            Self::ExpBeta { beta, sign: Sign::Minus } => format!("expbeta:{beta}:-"),
            Self::ExpBeta { beta, sign: Sign::Plus } => format!("expbeta:{beta}:+"),
            Self::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

/// The auxiliary `β` of Condition A.
#[derive(Clone)]
pub enum BetaChoice {
    /// `exp ∫₁ᵗ (γ + (γ−1)bs)² / (2(γ−1)s(1+bs)²) ds`, `b = 2K/(1+γ)`.
    PowerIntegral,
    /// `tanh(Kt)`.
    Tanh,
    /// `β = a`.
    Profile,
    /// User supplied `t ↦ (β(t), β'(t)/β(t))`.
    Custom(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl fmt::Debug for BetaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::PowerIntegral => "power-integral",
            Self::Tanh => "tanh",
            Self::Profile => "profile",
            Self::Custom(_) => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// `a'/a`
    pub da: f64,
    /// `A/a`
    pub int_a: f64,
    /// `B/a`
    pub int_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPhi {
    pub alpha: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub scale1: f64,
    pub scale2: f64,
    pub scale3: f64,
}

impl OdeResiduals {
    /// Largest `|r_i| / max(1, scale_i)`.
    pub fn max_scaled(&self) -> f64 {
        [(self.r1, self.scale1), (self.r2, self.scale2), (self.r3, self.scale3)]
            .iter()
            .map(|(r, s)| r.abs() / s.max(1.0))
            .fold(0.0, f64::max)
    }
}

/// `a`, `a'`, `(aα)'` and `(aφ)'` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HCoefficients {
    pub a: f64,
    pub da: f64,
    pub d_a_alpha: f64,
    pub d_a_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a1: bool,
    pub a2: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub passed: bool,
    /// Smallest `rhs − β'/β` relative to `max(1, |rhs|, |β'/β|)` on the grid.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub eta: f64,
    pub beta_max: f64,
    /// `sup β/(α−1)` and `η̃(T)` for Condition B.
    pub ratio_sup: Option<f64>,
    pub eta_tilde: Option<f64>,
    pub grid_points: usize,
}

#[derive(Clone, Debug)]
pub struct RateProfile {
    pub kind: ProfileKind,
    pub beta: Option<BetaChoice>,
}

const CONDITION_GRID: usize = 400;
const CONDITION_TOL: f64 = 1e-9;

impl RateProfile {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power profile needs γ > 1 (∫a'²/a diverges otherwise), got {gamma}"
            )));
        }
        Ok(Self { kind: ProfileKind::Power { gamma }, beta: Some(BetaChoice::PowerIntegral) })
    }

    pub fn power_cubic(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("power_cubic needs γ ≥ 0, got {gamma}")));
        }
        Ok(Self { kind: ProfileKind::PowerCubic { gamma }, beta: None })
    }

    pub fn sinh_sq() -> Self {
        Self { kind: ProfileKind::SinhSq, beta: Some(BetaChoice::Tanh) }
    }

    pub fn exp_sq(gamma: f64) -> Result<Self> {
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidArgument("exp_sq needs γ ≠ 0".into()));
        }
        Ok(Self { kind: ProfileKind::ExpSq { gamma }, beta: None })
    }

    pub fn exp_beta(beta: f64, sign: Sign) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("exp_beta needs β > 1, got {beta}")));
        }
        Ok(Self { kind: ProfileKind::ExpBeta { beta, sign }, beta: Some(BetaChoice::Profile) })
    }

    pub fn custom(
        name: impl Into<String>,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        da: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { kind: ProfileKind::Custom { name: name.into(), a: Arc::new(a), da: Arc::new(da) }, beta: None }
    }

    pub fn with_beta(mut self, beta: BetaChoice) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn spec(&self) -> String {
        self.kind.spec()
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self.kind, ProfileKind::Custom { .. })
    }

    fn needs_positive_k(&self) -> bool {
        matches!(self.kind, ProfileKind::SinhSq | ProfileKind::ExpSq { .. } | ProfileKind::ExpBeta { .. })
    }

    /// The `K` that enters the `α`, `φ` formulas: `−K` for `expbeta:+`, which
    /// is built for positive curvature.
    pub fn notation_k(&self, k: f64) -> f64 {
        match self.kind {
            ProfileKind::ExpBeta { sign: Sign::Plus, .. } => -k,
            _ => k,
        }
    }

    /// Upper end of the time domain for this `K`.
    pub fn domain_limit(&self, k: f64) -> f64 {
        match self.kind {
            ProfileKind::ExpBeta { beta, sign: Sign::Minus } => (1.0 + beta) * (1.0 + beta).ln() / (2.0 * k),
            _ => f64::INFINITY,
        }
    }

    fn check(&self, k: f64, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ProfileDomain(format!("t must be positive, got {t}")));
        }
        if !k.is_finite() || k < 0.0 {
            return Err(Error::ProfileDomain(format!("K must be finite and nonnegative, got {k}")));
        }
        if self.needs_positive_k() && k <= 0.0 {
            return Err(Error::ProfileDomain(format!("{} needs K > 0", self.spec())));
        }
        let limit = self.domain_limit(k);
        if t >= limit {
            return Err(Error::ProfileDomain(format!("{} is defined for t < {limit}, got {t}", self.spec())));
        }
        Ok(())
    }

    /// Leading exponent `σ` with `a(t) ~ t^σ` at zero.
    pub fn small_time_exponent(&self, k: f64) -> f64 {
        match &self.kind {
            ProfileKind::Power { gamma } => *gamma,
            ProfileKind::PowerCubic { .. } | ProfileKind::SinhSq | ProfileKind::ExpSq { .. } => 2.0,
            ProfileKind::ExpBeta { beta, .. } => *beta,
            ProfileKind::Custom { a, da, .. } => {
                let _ = k;
                let t = 1e-6;
                t * da(t) / a(t)
            }
        }
    }

    /// `(a(t), a'(t))`.
    pub fn eval(&self, t: f64, k: f64) -> Result<(f64, f64)> {
        self.check(k, t)?;
        Ok(match &self.kind {
            ProfileKind::Power { gamma } => (t.powf(*gamma), gamma * t.powf(gamma - 1.0)),
            ProfileKind::PowerCubic { gamma } => (t * t * (1.0 + gamma * t), t * (2.0 + 3.0 * gamma * t)),
            ProfileKind::SinhSq => {
                let x = k * t;
                (x.sinh().powi(2), k * (2.0 * x).sinh())
            }
            ProfileKind::ExpSq { gamma } => {
                let y = gamma * k * t;
                let em1 = y.exp_m1();
                (em1 * em1, 2.0 * gamma * k * y.exp() * em1)
            }
            ProfileKind::ExpBeta { beta, sign } => {
                let c = 2.0 * k / (1.0 + beta);
                let r = self.ratios(t, k)?;
                let a = match sign {
                    Sign::Minus => (-c * t).exp() * (-(-c * t).exp_m1()).powf(*beta),
                    Sign::Plus => (c * t).exp() * (c * t).exp_m1().powf(*beta),
                };
                (a, a * r.da)
            }
            ProfileKind::Custom { a, da, .. } => (a(t), da(t)),
        })
    }

    /// `a'/a`, `A/a`, `B/a` in closed form, or by quadrature for custom profiles.
    pub fn ratios(&self, t: f64, k: f64) -> Result<Ratios> {
        self.check(k, t)?;
        Ok(match &self.kind {
            ProfileKind::Power { gamma } => {
                let g = *gamma;
                Ratios { da: g / t, int_a: t / (g + 1.0), int_b: g * g / ((g - 1.0) * t) }
            }
            ProfileKind::PowerCubic { gamma } => {
                let g = *gamma;
                let w = 1.0 + g * t;
                let log_term = if g == 0.0 { t } else { (g * t).ln_1p() / g };
                Ratios {
                    da: (2.0 + 3.0 * g * t) / (t * w),
                    int_a: (t / 3.0 + g * t * t / 4.0) / w,
                    int_b: (3.0 * t + 4.5 * g * t * t + log_term) / (t * t * w),
                }
            }
            ProfileKind::SinhSq => {
                let x = k * t;
                let coth = 1.0 / x.tanh();
                let s = x.sinh();
                let x_over_s2 = if s.is_finite() { x / (s * s) } else { 0.0 };
                let sc_minus_x_over_s2 = if x < 0.5 { sinh_cosh_minus_x(x) / (s * s) } else { coth - x_over_s2 };
                Ratios {
                    da: 2.0 * k * coth,
                    int_a: sc_minus_x_over_s2 / (2.0 * k),
                    int_b: 2.0 * k * (x_over_s2 + coth),
                }
            }
            ProfileKind::ExpSq { gamma } => {
                let g = *gamma;
                let y = g * k * t;
                let em1 = y.exp_m1();
                let f_over_em1_sq = if y.abs() < 0.5 {
                    exp_sq_series(y) / (em1 * em1)
                } else if em1.is_finite() {
                    1.0 / (0.5 * y).tanh() - 4.0 / em1 + 2.0 * y / (em1 * em1)
                } else {
                    1.0
                };
                Ratios {
                    da: -2.0 * g * k / (-y).exp_m1(),
                    int_a: f_over_em1_sq / (2.0 * g * k),
                    int_b: 2.0 * g * k / (0.5 * y).tanh(),
                }
            }
            ProfileKind::ExpBeta { beta, sign } => {
                let b = *beta;
                let c = 2.0 * k / (1.0 + b);
                match sign {
                    Sign::Minus => {
                        let v = (-c * t).exp();
                        let w = -(-c * t).exp_m1();
                        Ratios {
                            da: c * (b * v - w) / w,
                            int_a: w / (c * (1.0 + b) * v),
                            int_b: c * (b * b / ((b - 1.0) * w) - 2.0 * (1.0 + b) + (1.0 + b) * w) / v,
                        }
                    }
                    Sign::Plus => {
                        let q = -(-c * t).exp_m1();
                        let e_inv = (-c * t).exp();
                        let m = (c * t).exp_m1();
                        let last = if m.is_finite() { b * b * e_inv / ((b - 1.0) * m) } else { 0.0 };
                        Ratios {
                            da: c * (1.0 + b / q),
                            int_a: q / (c * (1.0 + b)),
                            int_b: c * ((1.0 + b) * q + 2.0 * (1.0 + b) * e_inv + last),
                        }
                    }
                }
            }
            ProfileKind::Custom { .. } => self.ratios_quadrature(t, k)?,
        })
    }

    /// The same ratios with `A` and `B` from adaptive quadrature.
    pub fn ratios_quadrature(&self, t: f64, k: f64) -> Result<Ratios> {
        self.check(k, t)?;
        let (a, da) = self.eval(t, k)?;
        let sigma = self.small_time_exponent(k);
        let a_of = |s: f64| self.eval(s, k).map(|(a, _)| a).unwrap_or(f64::NAN);
        let b_of =
            |s: f64| self.eval(s, k).map(|(a, da)| if a > 0.0 { da * da / a } else { f64::NAN }).unwrap_or(f64::NAN);
        let big_a = integrate_from_zero(a_of, t, 1.0, 1e-13)?;
        let p = if sigma < 2.0 { 1.0 / (sigma - 1.0) } else { 1.0 };
        let big_b = integrate_from_zero(b_of, t, p, 1e-13)?;
        Ok(Ratios { da: da / a, int_a: big_a / a, int_b: big_b / a })
    }

    /// `α`, `φ` from the ratios: `α = 1 + 2κA/a`, `φ = nκ + nκ²A/a + nB/(4a)`.
    pub fn alpha_phi(&self, k: f64, n: f64, t: f64) -> Result<AlphaPhi> {
        Ok(combine(self.ratios(t, k)?, self.notation_k(k), n))
    }

    pub fn alpha_phi_quadrature(&self, k: f64, n: f64, t: f64) -> Result<AlphaPhi> {
        Ok(combine(self.ratios_quadrature(t, k)?, self.notation_k(k), n))
    }

    /// `α`, `φ` exactly as the worked examples display them. `None` for custom.
    pub fn alpha_phi_display(&self, k: f64, n: f64, t: f64) -> Result<Option<AlphaPhi>> {
        self.check(k, t)?;
        Ok(Some(match &self.kind {
            ProfileKind::Power { gamma } => {
                let g = *gamma;
                AlphaPhi {
                    alpha: 1.0 + 2.0 * k * t / (1.0 + g),
                    phi: n * k + n * k * k * t / (1.0 + g) + n * g * g / (4.0 * (g - 1.0) * t),
                }
            }
            ProfileKind::PowerCubic { gamma } => {
                let g = *gamma;
                let last = if g == 0.0 {
                    n / t
                } else {
                    n * (9.0 * g * g * t * t + 6.0 * g * t + 2.0 * (1.0 + g * t).ln())
                        / (8.0 * g * (t * t + g * t * t * t))
                };
                AlphaPhi {
                    alpha: 1.0 + 2.0 * k * t / 3.0 - g * k * t * t / (6.0 * (1.0 + g * t)),
                    phi: n * k + n * k * k * (4.0 * t + 3.0 * g * t * t) / (12.0 * (1.0 + g * t)) + last,
                }
            }
            ProfileKind::SinhSq => {
                let x = k * t;
                let (s, c) = (x.sinh(), x.cosh());
                AlphaPhi { alpha: 1.0 + (s * c - x) / (s * s), phi: n * k * (c / s + 1.0) }
            }
            ProfileKind::ExpSq { gamma } => {
                let g = *gamma;
                let y = g * k * t;
                let e = y.exp();
                let d = g * (e - 1.0).powi(2);
                AlphaPhi {
                    alpha: 1.0 + ((2.0 * y).exp() - 4.0 * e + 2.0 * y + 3.0) / d,
                    phi: n * k * (((g + 1.0) * e - 2.0).powi(2) + 2.0 * y - (g - 1.0).powi(2)) / (2.0 * d),
                }
            }
            ProfileKind::ExpBeta { beta, sign } => {
                let b = *beta;
                let c = 2.0 * k / (1.0 + b);
                let pre = n * k * b * b / (2.0 * (b - 1.0) * (b + 1.0));
                match sign {
                    Sign::Minus => {
                        AlphaPhi { alpha: (c * t).exp(), phi: pre * (2.0 * c * t).exp() / ((c * t).exp() - 1.0) }
                    }
                    Sign::Plus => {
                        AlphaPhi { alpha: (-c * t).exp(), phi: pre * (-2.0 * c * t).exp() / (1.0 - (-c * t).exp()) }
                    }
                }
            }
            ProfileKind::Custom { .. } => return Ok(None),
        }))
    }

    /// `(α', φ')` from `d(A/a)/dt = 1 − (a'/a)(A/a)` and
    /// `d(B/a)/dt = (a'/a)² − (a'/a)(B/a)`.
    pub fn alpha_phi_derivatives(&self, k: f64, n: f64, t: f64) -> Result<(f64, f64)> {
        let r = self.ratios(t, k)?;
        let kk = self.notation_k(k);
        let d_int_a = 1.0 - r.da * r.int_a;
        let d_int_b = r.da * r.da - r.da * r.int_b;
        Ok((2.0 * kk * d_int_a, n * kk * kk * d_int_a + 0.25 * n * d_int_b))
    }

    /// `a`, `a'`, `(aα)' = a' + 2κa` and `(aφ)' = nκa' + nκ²a + na'²/(4a)`.
    pub fn h_coefficients(&self, k: f64, n: f64, t: f64) -> Result<HCoefficients> {
        let (a, da) = self.eval(t, k)?;
        let kk = self.notation_k(k);
        Ok(HCoefficients {
            a,
            da,
            d_a_alpha: da + 2.0 * kk * a,
            d_a_phi: n * kk * da + n * kk * kk * a + n * da * da / (4.0 * a),
        })
    }

    /// Residuals of `(aα)' − 2aη/n`, `−4κa − 2a' + 4aη/n` and `(aφ)' − aη²/n`
    /// with `η = na'/(2a) + nκ` and the products differentiated by centered
    /// differences of step `1e-6·max(t, 1)`.
    pub fn ode_system_residuals(&self, k: f64, n: f64, t: f64) -> Result<OdeResiduals> {
        let h = 1e-6 * t.max(1.0);
        if t - h <= 0.0 {
            return Err(Error::ProfileDomain(format!("t = {t} too close to zero for the difference step")));
        }
        let kk = self.notation_k(k);
        let product = |s: f64| -> Result<(f64, f64)> {
            let (a, _) = self.eval(s, k)?;
            let ap = self.alpha_phi(k, n, s)?;
            Ok((a * ap.alpha, a * ap.phi))
        };
        let (lo, hi) = (product(t - h)?, product(t + h)?);
        let d_a_alpha = (hi.0 - lo.0) / (2.0 * h);
        let d_a_phi = (hi.1 - lo.1) / (2.0 * h);
        let (a, da) = self.eval(t, k)?;
        let eta = n * da / (2.0 * a) + n * kk;
        let t1 = 2.0 * a * eta / n;
        let t2 = 4.0 * a * eta / n;
        let t3 = a * eta * eta / n;
        Ok(OdeResiduals {
            r1: d_a_alpha - t1,
            r2: -4.0 * kk * a - 2.0 * da + t2,
            r3: d_a_phi - t3,
            scale1: d_a_alpha.abs().max(t1.abs()),
            scale2: (4.0 * kk * a).abs().max((2.0 * da).abs()).max(t2.abs()),
            scale3: d_a_phi.abs().max(t3.abs()),
        })
    }

    /// A1 (`a > 0`, `a' > 0`, `a → 0`, `a/a' → 0`) and A2 (`B` finite) on a log
    /// grid over `(0, t_max]`.
    pub fn validate(&self, k: f64, t_max: f64) -> Result<AssumptionReport> {
        let t_max = t_max.min(0.999 * self.domain_limit(k));
        let grid = log_grid(1e-6 * t_max, t_max, 60)?;
        let mut notes = Vec::new();
        let mut a1 = true;
        for &t in &grid {
            let (a, da) = self.eval(t, k)?;
            if !(a > 0.0 && da > 0.0) {
                a1 = false;
                notes.push(format!("a or a' not positive at t = {t}"));
                break;
            }
        }
        let eps = 1e-9 * t_max;
        let (a_eps, da_eps) = self.eval(eps, k)?;
        let (a_ref, _) = self.eval(t_max, k)?;
        if !(a_eps < 1e-6 * a_ref) {
            a1 = false;
            notes.push("a does not vanish at zero".into());
        }
        if !(a_eps / da_eps < 1e-6 * t_max) {
            a1 = false;
            notes.push("a/a' does not vanish at zero".into());
        }
        let mut a2 = true;
        for &t in grid.iter().step_by(6) {
            match self.ratios_quadrature(t, k) {
                Ok(r) if r.int_b.is_finite() => {}
                _ => {
                    a2 = false;
                    notes.push(format!("∫a'²/a did not converge at t = {t}"));
                    break;
                }
            }
        }
        Ok(AssumptionReport { a1, a2, notes })
    }

    /// `(β(t), β'(t)/β(t))`.
    pub fn beta(&self, t: f64, k: f64) -> Result<(f64, f64)> {
        self.check(k, t)?;
        let choice = self.beta.as_ref().ok_or_else(|| Error::Missing(format!("{} carries no β", self.spec())))?;
        match choice {
            BetaChoice::PowerIntegral => {
                let ProfileKind::Power { gamma: g } = self.kind else {
                    return Err(Error::InvalidArgument("power-integral β needs a power profile".into()));
                };
                let b = 2.0 * k / (1.0 + g);
                let big_g = |s: f64| {
                    (g - 1.0).powi(2) * s.ln() + (2.0 * g - 1.0) * (s / (1.0 + b * s)).ln() + 1.0 / (1.0 + b * s)
                };
                let log_beta = (big_g(t) - big_g(1.0)) / (2.0 * (g - 1.0));
                let num = g + (g - 1.0) * b * t;
                let dlog = num * num / (2.0 * (g - 1.0) * t * (1.0 + b * t).powi(2));
                Ok((log_beta.exp(), dlog))
            }
            BetaChoice::Tanh => {
                if k <= 0.0 {
                    return Err(Error::ProfileDomain("tanh β needs K > 0".into()));
                }
                let x = k * t;
                Ok((x.tanh(), 2.0 * k / (2.0 * x).sinh()))
            }
            BetaChoice::Profile => {
                let (a, _) = self.eval(t, k)?;
                Ok((a, self.ratios(t, k)?.da))
            }
            BetaChoice::Custom(f) => Ok(f(t)),
        }
    }

    /// `η(T) ≥ sup_{(0,T]} β`: `β(T)` for the built-in choices, which are
    /// increasing on their domains; a grid supremum for custom `β`.
    pub fn eta(&self, t_end: f64, k: f64) -> Result<f64> {
        match self.beta {
            Some(BetaChoice::Custom(_)) => {
                let grid = log_grid(1e-4 * t_end, t_end, CONDITION_GRID)?;
                grid.iter().try_fold(0.0f64, |m, &t| Ok(m.max(self.beta(t, k)?.0)))
            }
            _ => Ok(self.beta(t_end, k)?.0),
        }
    }

    /// Right side of the Condition A inequality,
    /// `(1/α²)(2κα(a'/a)(A/a) + B/(2a) − 2κ²A/a)`.
    pub fn condition_a_rhs(&self, t: f64, k: f64) -> Result<f64> {
        let r = self.ratios(t, k)?;
        let kk = self.notation_k(k);
        let alpha = 1.0 + 2.0 * kk * r.int_a;
        Ok((2.0 * kk * alpha * r.da * r.int_a + 0.5 * r.int_b - 2.0 * kk * kk * r.int_a) / (alpha * alpha))
    }

    /// `β(t)/(α(t) − 1)`.
    pub fn condition_b_ratio(&self, t: f64, k: f64) -> Result<f64> {
        let (beta, _) = self.beta(t, k)?;
        let r = self.ratios(t, k)?;
        Ok(beta / (2.0 * self.notation_k(k) * r.int_a))
    }

    /// `η̃(T)`: the supremum of `β/(α−1)` over `(0, T]` where it is known in
    /// closed form, a grid supremum otherwise.
    pub fn eta_tilde(&self, t_end: f64, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::Precondition("Condition B needs K > 0 (α − 1 vanishes at K = 0)".into()));
        }
        match (&self.kind, &self.beta) {
            (ProfileKind::Power { gamma: g }, Some(BetaChoice::PowerIntegral)) => {
                // The ratio increases up to t* and decreases after it when γ < 3.
                let g = *g;
                let r = (2.0 * (g - 1.0)).sqrt();
                let t_star = if g < 3.0 { (g - r) / (r - (g - 1.0)) * (1.0 + g) / (2.0 * k) } else { f64::INFINITY };
                self.condition_b_ratio(t_star.min(t_end), k)
            }
            (ProfileKind::SinhSq, Some(BetaChoice::Tanh)) => Ok(1.5),
            (ProfileKind::ExpBeta { .. }, Some(BetaChoice::Profile)) => Ok(1.0),
            _ => {
                let grid = log_grid(1e-4 * t_end, t_end, CONDITION_GRID)?;
                grid.iter().try_fold(f64::NEG_INFINITY, |m, &t| Ok(m.max(self.condition_b_ratio(t, k)?)))
            }
        }
    }

    /// Condition A on a log grid over `(0, T]`: `β'/β ≤ rhs` (relative
    /// tolerance `1e-9`, since the built-in pairs attain equality) and `β ≤ η(T)`.
    pub fn condition_a_check(&self, k: f64, t_end: f64) -> Result<ConditionReport> {
        if self.beta.is_none() {
            return Err(Error::Missing(format!("{} carries no β", self.spec())));
        }
        let t_end = self.clamp_end(k, t_end)?;
        let grid = log_grid(1e-4 * t_end, t_end, CONDITION_GRID)?;
        let eta = self.eta(t_end, k)?;
        let mut report = ConditionReport {
            passed: true,
            worst_margin: f64::INFINITY,
            worst_t: f64::NAN,
            eta,
            beta_max: 0.0,
            ratio_sup: None,
            eta_tilde: None,
            grid_points: grid.len(),
        };
        for &t in &grid {
            let (beta, dlog) = self.beta(t, k)?;
            let rhs = self.condition_a_rhs(t, k)?;
            let margin = (rhs - dlog) / rhs.abs().max(dlog.abs()).max(1.0);
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_t = t;
            }
            report.beta_max = report.beta_max.max(beta);
        }
        report.passed = report.worst_margin >= -CONDITION_TOL && report.beta_max <= eta * (1.0 + CONDITION_TOL);
        Ok(report)
    }

    /// Condition A plus `sup β/(α−1) ≤ η̃(T)`. Rejects `K = 0`.
    pub fn condition_b_check(&self, k: f64, t_end: f64) -> Result<ConditionReport> {
        if !(k > 0.0) {
            return Err(Error::Precondition("Condition B needs K > 0 (α − 1 vanishes at K = 0)".into()));
        }
        let mut report = self.condition_a_check(k, t_end)?;
        let t_end = self.clamp_end(k, t_end)?;
        let eta_tilde = self.eta_tilde(t_end, k)?;
        let grid = log_grid(1e-4 * t_end, t_end, CONDITION_GRID)?;
        let sup =
            grid.iter().try_fold(f64::NEG_INFINITY, |m, &t| Ok::<_, Error>(m.max(self.condition_b_ratio(t, k)?)))?;
        report.passed &= sup <= eta_tilde * (1.0 + CONDITION_TOL);
        report.ratio_sup = Some(sup);
        report.eta_tilde = Some(eta_tilde);
        Ok(report)
    }

    fn clamp_end(&self, k: f64, t_end: f64) -> Result<f64> {
        if !(t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("T must be positive, got {t_end}")));
        }
        let limit = self.domain_limit(k);
        Ok(if t_end >= limit { limit * (1.0 - 1e-9) } else { t_end })
    }
}

fn combine(r: Ratios, kk: f64, n: f64) -> AlphaPhi {
    let alpha = 1.0 + 2.0 * kk * r.int_a;
    let phi = if n.is_infinite() { f64::INFINITY } else { n * kk + n * kk * kk * r.int_a + 0.25 * n * r.int_b };
    AlphaPhi { alpha, phi }
}

/// `sinh x cosh x − x = Σ_{k≥1} (2x)^{2k+1} / (2(2k+1)!)`.
fn sinh_cosh_minus_x(x: f64) -> f64 {
    let y = 2.0 * x;
    let mut term = y * y * y / 6.0;
    let mut sum = 0.0f64;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs() && k < 60.0 {
        sum += term;
        term *= y * y / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        k += 1.0;
    }
    0.5 * sum
}

/// `e^{2y} − 4e^y + 2y + 3 = Σ_{m≥3} (2^m − 4) y^m / m!`.
fn exp_sq_series(y: f64) -> f64 {
    let mut sum = 0.0f64;
    let mut pow_fact = y * y / 2.0;
    let mut two_m = 4.0;
    for m in 3..60 {
        pow_fact *= y / m as f64;
        two_m *= 2.0;
        let term = (two_m - 4.0) * pow_fact;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

impl FromStr for RateProfile {
    type Err = Error;

    /// `power:γ`, `powercubic:γ`, `sinh2`, `expsq:γ`, `expbeta:β:-` or `expbeta:β:+`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parse(format!("profile '{s}' is missing a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("profile '{s}': {e}")))
        };
        let arity = |n: usize| {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("profile '{s}' expects {} parameter(s)", n - 1)))
            }
        };
        match parts[0] {
            "power" => {
                arity(2)?;
                Self::power(num(1)?)
            }
            "powercubic" => {
                arity(2)?;
                Self::power_cubic(num(1)?)
            }
            "sinh2" => {
                arity(1)?;
                Ok(Self::sinh_sq())
            }
            "expsq" => {
                arity(2)?;
                Self::exp_sq(num(1)?)
            }
            "expbeta" => {
                arity(3)?;
                let sign = match parts[2] {
                    "-" => Sign::Minus,
                    "+" => Sign::Plus,
                    other => return Err(Error::Parse(format!("expbeta sign must be + or -, got '{other}'"))),
                };
                Self::exp_beta(num(1)?, sign)
            }
            other => Err(Error::Parse(format!("unknown profile '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn power_two_at_zero_curvature() {
        let p = RateProfile::power(2.0).unwrap();
        for t in [0.1, 1.0, 4.0] {
            let ap = p.alpha_phi(0.0, 4.0, t).unwrap();
            assert_eq!(ap.alpha, 1.0);
            assert!(close(ap.phi / 2.0, 2.0 / t, 1e-15));
        }
        let ap = p.alpha_phi(0.6, 3.0, 2.0).unwrap();
        assert!(close(ap.alpha, 1.0 + 2.0 * 0.6 * 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn sinh_display() {
        let p = RateProfile::sinh_sq();
        for t in [1e-3, 0.3, 2.0, 40.0] {
            let ap = p.alpha_phi(1.3, 2.0, t).unwrap();
            let x = 1.3 * t;
            let phi = 2.0 * 1.3 * (1.0 / x.tanh() + 1.0);
            assert!(close(ap.phi, phi, 1e-13), "{t}");
            if x > 0.1 {
                let alpha = 1.0 + (x.sinh() * x.cosh() - x) / x.sinh().powi(2);
                assert!(close(ap.alpha, alpha, 1e-13), "{t}");
            }
        }
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(RateProfile::power(1.0).is_err());
        assert!(RateProfile::power(0.5).is_err());
        assert!(RateProfile::power_cubic(-1.0).is_err());
        assert!(RateProfile::exp_sq(0.0).is_err());
        assert!(RateProfile::exp_beta(1.0, Sign::Minus).is_err());
        assert!(RateProfile::sinh_sq().alpha_phi(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn exp_beta_domain_is_enforced() {
        let p = RateProfile::exp_beta(2.0, Sign::Minus).unwrap();
        let limit = 3.0 * 3f64.ln() / 2.0;
        assert!(p.alpha_phi(1.0, 2.0, 0.99 * limit).is_ok());
        assert!(matches!(p.alpha_phi(1.0, 2.0, limit), Err(Error::ProfileDomain(_))));
    }

    #[test]
    fn series_agree_with_direct_forms() {
        for x in [0.2, 0.4, 0.49] {
            assert!(close(sinh_cosh_minus_x(x), x.sinh() * x.cosh() - x, 1e-12));
            let direct = (2.0 * x).exp() - 4.0 * x.exp() + 2.0 * x + 3.0;
            assert!(close(exp_sq_series(x), direct, 1e-11));
            assert!(close(exp_sq_series(-x), (-2.0 * x).exp() - 4.0 * (-x).exp() - 2.0 * x + 3.0, 1e-11));
        }
    }

    #[test]
    fn parses_specs() {
        for s in ["power:2", "powercubic:0.5", "sinh2", "expsq:1.5", "expbeta:2:-", "expbeta:1.5:+"] {
            assert_eq!(s.parse::<RateProfile>().unwrap().spec(), s);
        }
        for s in ["power", "power:1", "sinh2:1", "expbeta:2", "expbeta:2:x", "cosh"] {
            assert!(s.parse::<RateProfile>().is_err(), "{s}");
        }
    }

    #[test]
    fn condition_b_rejects_zero_curvature() {
        let p = RateProfile::sinh_sq();
        assert!(matches!(p.condition_b_check(0.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn missing_beta() {
        let p = RateProfile::exp_sq(1.0).unwrap();
        assert!(matches!(p.condition_a_check(1.0, 1.0), Err(Error::Missing(_))));
    }
}
