//! The acceptance suite: ten criteria, each made of sub-checks with pinned
//! tolerances. Shared by the `acceptance` test target and `licurv selftest`.
//!
//! Independent oracles (RK4 time stepping, grid search, finite differences)
//! live here so the self-test can run them outside `cargo test`.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_report, CdeOptions, CurvatureReport};
use crate::error::Result;
use crate::estimates::{
    hamilton_check, lemma_diff1_residual, liouville_check, liyau_global_check, max_principle_check, uh_field,
    LiouvilleKind, MaxPrincipleMode,
};
use crate::graph::{generate, Family, MeasureKind, WeightedGraph, Weighting};
use crate::harnack::{
    harnack_check, kernel_bounds_check, lemma51_check, rho_bound_remark, rho_compute, Alpha, BoundVariant, RemarkBound,
};
use crate::heat::{delta_like, evolve, log_grid, HeatPropagator, HeatSolution};
use crate::operators::{gamma, gamma2, gamma2_tilde, laplacian, laplacian_all, sqrt_identity_residual};
use crate::profiles::{RateProfile, Sign};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Set when the failure traces back to a defect in the source statement.
    pub known_defect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub checks: Vec<SubCheck>,
    pub seconds: f64,
    pub time_limit: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.seconds < self.time_limit
    }

    /// Failing sub-checks not explained by a known defect.
    pub fn unexplained_failures(&self) -> Vec<&SubCheck> {
        self.checks.iter().filter(|c| !c.passed && !c.known_defect).collect()
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {} ({})", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail))
            .collect();
        format!(
            "criterion {:>2} {verdict}: {} [{:.2} s of {} s] {}",
            self.id,
            self.name,
            self.seconds,
            self.time_limit,
            checks.join("; ")
        )
    }
}

fn check(name: &str, passed: bool, detail: String) -> SubCheck {
    SubCheck { name: name.into(), passed, detail, known_defect: false }
}

fn failed(name: &str, err: impl std::fmt::Display) -> SubCheck {
    check(name, false, format!("error: {err}"))
}

/// State shared between criteria so the curvature sweep runs once.
#[derive(Default)]
pub struct Suite {
    curvature: OnceLock<Result<(CurvatureReport, CurvatureReport)>>,
}

pub const CRITERIA: [(usize, &str, f64); 10] = [
    (1, "operator identities", 10.0),
    (2, "heat semigroup", 30.0),
    (3, "curvature regression", 120.0),
    (4, "global Li-Yau", 60.0),
    (5, "profile algebra", 30.0),
    (6, "evolution identity for uH", 60.0),
    (7, "Hamilton estimate", 30.0),
    (8, "path cost and Harnack", 120.0),
    (9, "heat kernel bands", 60.0),
    (10, "maximum principle and Liouville", 30.0),
];

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(&self, id: usize) -> CriterionResult {
        let (_, name, limit) = CRITERIA[id - 1];
        let start = Instant::now();
        let checks = match id {
            1 => criterion_operators(),
            2 => criterion_semigroup(),
            3 => self.criterion_curvature(),
            4 => self.criterion_liyau(),
            5 => criterion_profiles(),
            6 => criterion_uh_identity(),
            7 => criterion_hamilton(),
            8 => criterion_harnack(),
            9 => criterion_kernel(),
            10 => self.criterion_max_principle(),
            _ => unreachable!("criteria are numbered 1 to 10"),
        };
        CriterionResult { id, name: name.into(), checks, seconds: start.elapsed().as_secs_f64(), time_limit: limit }
    }

    pub fn run_all(&self) -> Vec<CriterionResult> {
        (1..=10).map(|id| self.run(id)).collect()
    }

    fn curvature(&self) -> &Result<(CurvatureReport, CurvatureReport)> {
        self.curvature.get_or_init(|| {
            let g = torus(5)?;
            let opts = CdeOptions::default();
            Ok((curvature_report(&g, 4.0, &opts)?, curvature_report(&g, f64::INFINITY, &opts)?))
        })
    }

    /// `max(0, −min K*(x,4)) + 0.01` on the criterion graph.
    fn adapted_k(&self) -> Result<f64> {
        match self.curvature() {
            Ok((r4, _)) => Ok((-r4.min_k()).max(0.0) + 0.01),
            Err(e) => Err(crate::Error::Precondition(format!("curvature sweep failed: {e}"))),
        }
    }

    fn criterion_curvature(&self) -> Vec<SubCheck> {
        let (r4, rinf) = match self.curvature() {
            Ok(r) => r,
            Err(e) => return vec![failed("curvature sweep", e)],
        };
        let min = r4.min_k();
        let spread = r4.max_k() - min;
        let worst_mono =
            r4.vertices.iter().zip(&rinf.vertices).map(|(a, b)| b.k_star - a.k_star).fold(f64::INFINITY, f64::min);
        vec![
            check("min K*(x,4) >= -1e-5", min >= -1e-5, format!("min {min:.3e}")),
            check("vertex spread <= 1e-5", spread <= 1e-5, format!("spread {spread:.3e}")),
            check(
                "K*(x,inf) >= K*(x,4) - 1e-8",
                worst_mono >= -1e-8,
                format!("min K*(x,inf) - K*(x,4) = {worst_mono:.3e}"),
            ),
        ]
    }

    fn criterion_liyau(&self) -> Vec<SubCheck> {
        let sol = match criterion_solution() {
            Ok(s) => s,
            Err(e) => return vec![failed("heat solution", e)],
        };
        let k = match self.adapted_k() {
            Ok(k) => k,
            Err(e) => return vec![failed("curvature-adapted K", e)],
        };
        liyau_cases(k)
            .into_iter()
            .map(|(p, k)| {
                let name = format!("{} at K = {k:.4}", p.spec());
                match liyau_global_check(&sol, &p, k, 4.0) {
                    Ok(r) => {
                        let m = r.min_slack().unwrap_or(f64::INFINITY);
                        check(&name, m >= -1e-9, format!("min slack {m:.3e} over {} rows", r.rows.len()))
                    }
                    Err(e) => failed(&name, e),
                }
            })
            .collect()
    }

    fn criterion_max_principle(&self) -> Vec<SubCheck> {
        let mut out = Vec::new();
        match (criterion_solution(), self.adapted_k()) {
            (Ok(sol), Ok(k)) => {
                for (p, k) in liyau_cases(k) {
                    let name = format!("uH replay {} at K = {k:.4}", p.spec());
                    let result = uh_field(&sol, &p, k, 4.0).and_then(|(field, mask)| {
                        max_principle_check(sol.graph(), &field, &mask, MaxPrincipleMode::Weak)
                    });
                    out.push(match result {
                        Ok(r) => check(
                            &name,
                            r.passed() && r.hypothesis_holds,
                            format!(
                                "max uH {:.3e}, min heat operator on mask {:.3e}",
                                r.max_value, r.min_heat_operator
                            ),
                        ),
                        Err(e) => failed(&name, e),
                    });
                }
            }
            (Err(e), _) | (_, Err(e)) => out.push(failed("uH replay", e)),
        }
        let mut connected_ok = 0;
        let zoo = liouville_zoo();
        let total = zoo.len();
        for g in &zoo {
            if liouville_check(g, LiouvilleKind::FiniteN).map(|r| r.passed).unwrap_or(false) {
                connected_ok += 1;
            }
        }
        out.push(check(
            "Liouville on connected generators",
            connected_ok == total,
            format!("{connected_ok}/{total} pass"),
        ));
        let union = generate(Family::Cycle(5), Weighting::Unit, MeasureKind::Unit)
            .map(|c| c.disjoint_union(&generate(Family::Cycle(6), Weighting::Unit, MeasureKind::Unit).unwrap()));
        out.push(match union.and_then(|g| liouville_check(&g, LiouvilleKind::InfiniteN)) {
            Ok(r) => check(
                "Liouville fails on two components",
                !r.passed && r.kernel_dimension == 2,
                format!("kernel dimension {}", r.kernel_dimension),
            ),
            Err(e) => failed("Liouville fails on two components", e),
        });
        out
    }
}

fn torus(side: usize) -> Result<WeightedGraph> {
    generate(Family::Torus { dim: 2, side }, Weighting::Unit, MeasureKind::Degree)
}

/// torus(2,5), μ = deg, delta-like data at vertex 0, 25 log-spaced times on `[0.05, 5]`.
pub fn criterion_solution() -> Result<HeatSolution> {
    let g = torus(5)?;
    let u0 = delta_like(&g, 0, 1e-6)?;
    evolve(&g, &u0, &log_grid(0.05, 5.0, 25)?)
}

fn liyau_cases(k: f64) -> Vec<(RateProfile, f64)> {
    vec![
        (RateProfile::power(2.0).expect("valid"), 0.0),
        (RateProfile::sinh_sq(), k),
        (RateProfile::power(2.0).expect("valid"), k),
        (RateProfile::exp_sq(1.0).expect("valid"), k),
    ]
}

/// The operator zoo with random weights and measures.
pub fn random_zoo(seed: u64) -> Vec<WeightedGraph> {
    [Family::Path(5), Family::Cycle(6), Family::Torus { dim: 2, side: 5 }, Family::Hypercube(3), Family::Complete(4)]
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            generate(f, Weighting::Random(seed + 2 * i as u64), MeasureKind::Random(seed + 2 * i as u64 + 1))
                .expect("zoo graphs are valid")
        })
        .collect()
}

fn liouville_zoo() -> Vec<WeightedGraph> {
    let mut zoo = random_zoo(100);
    for f in [Family::Path(2), Family::Cycle(8), Family::Random { n: 12, p: 0.3, seed: 5 }] {
        zoo.push(generate(f, Weighting::Unit, MeasureKind::Unit).expect("valid"));
    }
    zoo
}

fn criterion_operators() -> Vec<SubCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let zoo = random_zoo(10);
    let (mut id12, mut tilde, mut ibp) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let g = &zoo[i % zoo.len()];
        let nv = g.vertex_count();
        let f: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.2..2.0)).collect();
        let h: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let root: Vec<f64> = f.iter().map(|v| v.sqrt()).collect();
        let gam = (0..nv).map(|y| gamma(g, &f, &f, y)).collect::<Vec<_>>();
        let ratio: Vec<f64> = (0..nv).map(|y| gam[y] / f[y]).collect();
        for x in 0..nv {
            let r = sqrt_identity_residual(g, &f, x).unwrap_or(f64::NAN);
            id12 = id12.max(r.abs() / (1.0 + laplacian(g, &root, x).abs()));
            let a = gamma2_tilde(g, &f, x).unwrap_or(f64::NAN);
            let g2 = gamma2(g, &f, x);
            let corr = gamma(g, &f, &ratio, x);
            let scale = a.abs().max(g2.abs()).max(corr.abs()).max(1e-300);
            tilde = tilde.max((a - (g2 - corr)).abs() / scale);
        }
        let lap = laplacian_all(g, &h);
        let mass: f64 = (0..nv).map(|x| g.measure(x) * lap[x]).sum();
        let mass_scale: f64 = (0..nv).map(|x| (g.measure(x) * lap[x]).abs()).sum::<f64>().max(1e-300);
        let lhs: f64 = (0..nv).map(|x| g.measure(x) * gamma(g, &f, &h, x)).sum();
        let rhs: f64 = -(0..nv).map(|x| g.measure(x) * f[x] * lap[x]).sum::<f64>();
        let scale: f64 = (0..nv).map(|x| (g.measure(x) * f[x] * lap[x]).abs()).sum::<f64>().max(1e-300);
        ibp = ibp.max((mass / mass_scale).abs()).max((lhs - rhs).abs() / scale);
    }
    vec![
        check("square-root identity <= 1e-12", id12 <= 1e-12, format!("max {id12:.2e}")),
        check("modified vs iterated form <= 1e-12", tilde <= 1e-12, format!("max {tilde:.2e}")),
        check("integration by parts <= 1e-11", ibp <= 1e-11, format!("max {ibp:.2e}")),
    ]
}

/// Classical fourth-order Runge-Kutta for `∂_t u = Δu`.
pub fn rk4_heat(g: &WeightedGraph, u0: &[f64], t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    let mut u = u0.to_vec();
    let axpy = |u: &[f64], k: &[f64], s: f64| -> Vec<f64> { u.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        let k1 = laplacian_all(g, &u);
        let k2 = laplacian_all(g, &axpy(&u, &k1, h / 2.0));
        let k3 = laplacian_all(g, &axpy(&u, &k2, h / 2.0));
        let k4 = laplacian_all(g, &axpy(&u, &k3, h));
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    u
}

fn criterion_semigroup() -> Vec<SubCheck> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let graphs = [torus(5).expect("valid"), random_zoo(20).swap_remove(2)];
    let (mut drift, mut sym, mut stoch, mut law, mut rk) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for g in &graphs {
        let nv = g.vertex_count();
        let prop = HeatPropagator::new(g);
        let u0: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.0..2.0)).collect();
        let times = log_grid(0.01, 10.0, 15).expect("valid grid");
        let sol = match evolve(g, &u0, &times) {
            Ok(s) => s,
            Err(e) => return vec![failed("evolve", e)],
        };
        let m0: f64 = (0..nv).map(|x| g.measure(x) * u0[x]).sum();
        for j in 0..times.len() {
            drift = drift.max((sol.mass(j) - m0).abs() / m0);
        }
        for &t in &[0.1, 1.0, 5.0] {
            let p = prop.heat_kernel(t).expect("t > 0");
            for x in 0..nv {
                let row: f64 = (0..nv).map(|y| p.get(x, y) * g.measure(y)).sum();
                stoch = stoch.max((row - 1.0).abs());
                for y in 0..nv {
                    sym = sym.max((p.get(x, y) - p.get(y, x)).abs());
                }
            }
        }
        let prod = prop.semigroup_matrix(0.3) * prop.semigroup_matrix(0.7);
        law = law.max((prod - prop.semigroup_matrix(1.0)).abs().max());
        let exact = prop.propagate(&u0, 2.0);
        let oracle = rk4_heat(g, &u0, 2.0, 1e-3);
        rk = rk.max(exact.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    out.push(check("mass drift <= 1e-10", drift <= 1e-10, format!("max relative {drift:.2e}")));
    out.push(check("kernel symmetry <= 1e-12", sym <= 1e-12, format!("max {sym:.2e}")));
    out.push(check("mu-stochastic rows <= 1e-10", stoch <= 1e-10, format!("max {stoch:.2e}")));
    out.push(check("semigroup law <= 1e-10", law <= 1e-10, format!("max {law:.2e}")));
    out.push(check("spectral vs RK4 <= 1e-6", rk <= 1e-6, format!("max {rk:.2e}")));
    out
}

/// The closed-form profiles and the curvature values they are checked at.
pub fn example_profiles() -> Vec<(RateProfile, f64)> {
    vec![
        (RateProfile::power(2.0).expect("valid"), 0.7),
        (RateProfile::power(1.5).expect("valid"), 0.0),
        (RateProfile::power(2.8).expect("valid"), 1.3),
        (RateProfile::power_cubic(0.0).expect("valid"), 0.5),
        (RateProfile::power_cubic(1.5).expect("valid"), 0.5),
        (RateProfile::sinh_sq(), 0.8),
        (RateProfile::exp_sq(1.0).expect("valid"), 0.6),
        (RateProfile::exp_sq(-0.7).expect("valid"), 0.6),
        (RateProfile::exp_beta(2.0, Sign::Minus).expect("valid"), 0.3),
        (RateProfile::exp_beta(1.5, Sign::Plus).expect("valid"), 0.4),
    ]
}

/// Profiles with Condition A data and the curvature values to test them at.
pub fn condition_cases() -> Vec<(RateProfile, f64)> {
    vec![
        (RateProfile::power(2.0).expect("valid"), 0.0),
        (RateProfile::power(2.0).expect("valid"), 1.0),
        (RateProfile::power(1.3).expect("valid"), 0.4),
        (RateProfile::power(2.9).expect("valid"), 2.0),
        (RateProfile::sinh_sq(), 0.5),
        (RateProfile::sinh_sq(), 3.0),
        (RateProfile::exp_beta(2.0, Sign::Minus).expect("valid"), 1.0),
        (RateProfile::exp_beta(1.5, Sign::Minus).expect("valid"), 0.7),
        (RateProfile::exp_beta(2.0, Sign::Plus).expect("valid"), 1.0),
        (RateProfile::exp_beta(1.2, Sign::Plus).expect("valid"), 0.3),
    ]
}

fn criterion_profiles() -> Vec<SubCheck> {
    let (mut closed, mut ode) = (0.0f64, 0.0f64);
    let mut errors = Vec::new();
    for (p, k) in example_profiles() {
        let limit = p.domain_limit(k).min(5.0);
        for i in 0..40 {
            let t = 0.05 + (limit * 0.999 - 0.05) * i as f64 / 39.0;
            match (p.alpha_phi(k, 3.0, t), p.alpha_phi_quadrature(k, 3.0, t), p.ode_system_residuals(k, 4.0, t)) {
                (Ok(a), Ok(b), Ok(r)) => {
                    closed = closed.max(rel(a.alpha, b.alpha)).max(rel(a.phi, b.phi));
                    if let Ok(Some(d)) = p.alpha_phi_display(k, 3.0, t) {
                        closed = closed.max(rel(d.alpha, b.alpha)).max(rel(d.phi, b.phi));
                    }
                    ode = ode.max(r.max_scaled());
                }
                (a, b, r) => errors.push(format!("{} t={t}: {:?} {:?} {:?}", p.spec(), a.err(), b.err(), r.err())),
            }
        }
    }
    let (mut a_ok, mut b_ok, mut a_total, mut b_total) = (0, 0, 0, 0);
    for (p, k) in condition_cases() {
        a_total += 1;
        a_ok += p.condition_a_check(k, 5.0).map(|r| r.passed as usize).unwrap_or(0);
        if k > 0.0 {
            b_total += 1;
            b_ok += p.condition_b_check(k, 5.0).map(|r| r.passed as usize).unwrap_or(0);
        }
    }
    vec![
        check(
            "closed forms vs quadrature <= 1e-9",
            closed <= 1e-9 && errors.is_empty(),
            if errors.is_empty() { format!("max relative {closed:.2e}") } else { errors.join(", ") },
        ),
        check("ODE system residuals <= 1e-6 scale", ode <= 1e-6, format!("max scaled {ode:.2e}")),
        check("Condition A", a_ok == a_total, format!("{a_ok}/{a_total} pass")),
        check("Condition B", b_ok == b_total, format!("{b_ok}/{b_total} pass")),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn criterion_uh_identity() -> Vec<SubCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zoo = random_zoo(60);
    let profiles = example_profiles();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for i in 0..50 {
        let g = &zoo[rng.gen_range(0..zoo.len())];
        let nv = g.vertex_count();
        let u0: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.2..2.0)).collect();
        let (p, k0) = &profiles[i % profiles.len()];
        let k = k0 * rng.gen_range(0.5..1.5);
        let n = rng.gen_range(1.0..6.0);
        let t_hi = p.domain_limit(k).min(5.0) * 0.95;
        let t = rng.gen_range(0.05..t_hi);
        let result = evolve(g, &u0, &[t]).and_then(|sol| lemma_diff1_residual(&sol, p, k, n, rng.gen_range(0..nv), t));
        match result {
            Ok(d) => worst = worst.max(d.residual.abs() / d.scale.max(1e-300)),
            Err(e) => errors.push(format!("{} t={t}: {e}", p.spec())),
        }
    }
    vec![check(
        "|residual| <= 1e-8 scale over 50 draws",
        worst <= 1e-8 && errors.is_empty(),
        if errors.is_empty() { format!("max scaled {worst:.2e}") } else { errors.join(", ") },
    )]
}

fn criterion_hamilton() -> Vec<SubCheck> {
    match criterion_solution().and_then(|sol| hamilton_check(&sol, 0.0)) {
        Ok((main, variant)) => {
            let (a, b) = (main.min_slack().unwrap_or(f64::INFINITY), variant.min_slack().unwrap_or(f64::INFINITY));
            vec![
                check("max-based form", a >= -1e-9, format!("min slack {a:.3e}")),
                check("degree-ratio form", b >= -1e-9, format!("min slack {b:.3e}")),
            ]
        }
        Err(e) => vec![failed("Hamilton sweep", e)],
    }
}

/// One random draw inside the regime of `which` (0..5).
fn remark_draw(
    rng: &mut ChaCha8Rng,
    which: usize,
    zoo: &[WeightedGraph],
) -> (usize, usize, usize, RemarkBound, f64, f64, f64) {
    let gi = rng.gen_range(0..zoo.len());
    let nv = zoo[gi].vertex_count();
    let x = rng.gen_range(0..nv);
    let y = (x + rng.gen_range(1..nv)) % nv;
    let d = zoo[gi].distance(x, y).expect("connected");
    let k: f64 = rng.gen_range(0.05..2.0);
    let t1: f64 = rng.gen_range(0.1..3.0);
    let (bound, t1, t2) = match which {
        0 => (RemarkBound::Power { gamma: rng.gen_range(1.1..2.9) }, t1, t1 + rng.gen_range(0.05..3.0)),
        1 => (RemarkBound::SinhCoth, t1, t1 + rng.gen_range(0.05..3.0)),
        2 => (RemarkBound::SinhLog, t1, t1 + rng.gen_range(0.01..0.99) * t1 * d as f64),
        3 => {
            let t2 = rng.gen_range(0.05..0.98) / k;
            (RemarkBound::SinhSmall { delta: 0.99 }, t2 * rng.gen_range(0.05..0.95), t2)
        }
        _ => {
            let beta = rng.gen_range(1.01..2.0);
            let limit = (1.0 + beta) * (1.0f64 + beta).ln() / (2.0 * k);
            let t2 = limit * rng.gen_range(0.3..0.99);
            (RemarkBound::ExpBeta { beta }, t2 * rng.gen_range(0.05..0.95), t2)
        }
    };
    (gi, x, y, bound, k, t1, t2)
}

fn criterion_harnack() -> Vec<SubCheck> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let zoo = random_zoo(80);

    let mut worst = 0.0f64;
    for g in &zoo {
        let b = g.bounds();
        for (x, y, _) in g.edges().take(4) {
            let (t1, t2) = (rng.gen_range(0.1..2.0), 0.0);
            let t2 = t1 + rng.gen_range(0.1..3.0) + t2;
            match rho_compute(g, x, y, t1, t2, &Alpha::Const(1.0), None) {
                Ok(r) => {
                    let expected = 2.0 * b.mu_max / (b.omega_min * (t2 - t1));
                    worst = worst.max(rel(r.rho, expected));
                }
                Err(e) => out.push(failed("rho for adjacent vertices", e)),
            }
        }
    }
    out.push(check("rho(x~y, alpha=1) closed form <= 1e-12", worst <= 1e-12, format!("max relative {worst:.2e}")));

    for which in 0..5 {
        let (mut fails, mut corrected_fails, mut worst_ratio) = (0, 0, 0.0f64);
        let mut name = "";
        let mut errors = Vec::new();
        for _ in 0..50 {
            let (gi, x, y, bound, k, t1, t2) = remark_draw(&mut rng, which, &zoo);
            name = bound.name();
            let g = &zoo[gi];
            let b = g.bounds();
            let d = g.distance(x, y).expect("connected");
            let result = rho_compute(g, x, y, t1, t2, &bound.alpha(k), None).and_then(|r| {
                let shown = rho_bound_remark(bound, BoundVariant::Displayed, k, d, t1, t2, b.mu_max, b.omega_min)?;
                let fixed = rho_bound_remark(bound, BoundVariant::Corrected, k, d, t1, t2, b.mu_max, b.omega_min)?;
                Ok((r.rho, shown, fixed))
            });
            match result {
                Ok((rho, shown, fixed)) => {
                    let tol = 1e-12 * rho.max(1.0);
                    if rho > shown + tol {
                        fails += 1;
                        worst_ratio = worst_ratio.max(rho / shown);
                    }
                    if rho > fixed + tol {
                        corrected_fails += 1;
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        let has_variant = matches!(name, "sinh-log" | "expbeta");
        let mut detail = format!("{}/50 draws exceed the displayed bound", fails);
        if fails > 0 {
            detail.push_str(&format!(", worst rho/bound {worst_ratio:.3}"));
        }
        if has_variant {
            detail.push_str(&format!(", {corrected_fails}/50 exceed the normalized bound"));
        }
        if !errors.is_empty() {
            detail.push_str(&format!(", errors: {}", errors.join(" | ")));
        }
        let mut sub = check(&format!("rho <= remark bound ({name})"), fails == 0 && errors.is_empty(), detail);
        sub.known_defect = has_variant && corrected_fails == 0 && errors.is_empty();
        out.push(sub);
    }

    match criterion_solution() {
        Ok(sol) => {
            let p = RateProfile::power(2.0).expect("valid");
            let times = sol.times().to_vec();
            let mut worst = f64::INFINITY;
            let mut errors = Vec::new();
            for _ in 0..20 {
                let (x, y) = (rng.gen_range(0..25), rng.gen_range(0..25));
                let i = rng.gen_range(0..times.len() - 1);
                let j = rng.gen_range(i + 1..times.len());
                match harnack_check(&sol, x, y, times[i], times[j], &p, 0.0, 4.0) {
                    Ok(c) => match c.form("zero") {
                        Some(f) => worst = worst.min(f.slack),
                        None => errors.push("zero-curvature display missing".to_string()),
                    },
                    Err(e) => errors.push(e.to_string()),
                }
            }
            out.push(check(
                "zero-curvature Harnack display, log-slack >= -1e-9",
                worst >= -1e-9 && errors.is_empty(),
                if errors.is_empty() { format!("min log-slack {worst:.3e}") } else { errors.join(", ") },
            ));
        }
        Err(e) => out.push(failed("zero-curvature Harnack display", e)),
    }

    let mut worst = f64::INFINITY;
    let mut errors = 0;
    for _ in 0..1000 {
        let pc: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ac: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let floor = rng.gen_range(0.1..2.0);
        let t1 = rng.gen_range(0.0..2.0);
        let t2 = t1 + rng.gen_range(0.1..3.0);
        let psi = |t: f64| pc[0] + t * (pc[1] + t * (pc[2] + t * pc[3]));
        let alpha = |t: f64| floor + (ac[0] + t * (ac[1] + t * ac[2])).powi(2);
        match lemma51_check(psi, alpha, t1, t2) {
            Ok(r) => worst = worst.min(r.slack),
            Err(_) => errors += 1,
        }
    }
    out.push(check(
        "min-average lemma, slack >= -1e-8 over 1000 draws",
        worst >= -1e-8 && errors == 0,
        format!("min slack {worst:.3e}, {errors} errors"),
    ));
    out
}

fn criterion_kernel() -> Vec<SubCheck> {
    let g = match torus(7) {
        Ok(g) => g,
        Err(e) => return vec![failed("torus(2,7)", e)],
    };
    let grid = log_grid(1.5, 20.0, 30).expect("valid grid");
    let mut out = Vec::new();
    for (x, y) in [(0, 0), (0, 1)] {
        match kernel_bounds_check(&g, x, y, &grid, 0.0, 4.0) {
            Ok(r) => {
                let band = r.band("upper").expect("always present");
                out.push(check(
                    &format!("upper band ({x},{y}) sup/inf <= 10"),
                    band.spread() <= 10.0,
                    format!("sup/inf {:.3}", band.spread()),
                ));
                out.push(check(
                    &format!("lower fit ({x},{y}) residuals >= 0"),
                    r.lower_fit.min_residual >= 0.0,
                    format!("c {:.3e}, C3 {:.3e}", r.lower_fit.c, r.lower_fit.c3),
                ));
            }
            Err(e) => out.push(failed("kernel bands", e)),
        }
    }
    out
}

/// Even-cycle data with `Δu = 0` at two antipodal vertices for all `t`.
pub fn antipodal_cycle_data() -> (WeightedGraph, Vec<f64>) {
    let g = generate(Family::Cycle(8), Weighting::Unit, MeasureKind::Unit).expect("valid");
    let u0 = (0..8).map(|k| 2.0 + (PI * k as f64 / 4.0).cos()).collect();
    (g, u0)
}
