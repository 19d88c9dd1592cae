//! Numerical search for the best constant in the exponential
//! curvature-dimension inequality `CDE(n, K)`.
//!
//! The search is a heuristic upper estimate of the infimum: a reported `K*`
//! means no admissible `f` with a smaller functional value was found.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::operators::{gamma, gamma2_tilde, laplacian};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::report::{fmt_float, to_json_string, Emit, Table};

/// `Δf(x)` must stay at or below this during the search.
pub const LAPLACIAN_CEILING: f64 = -1e-10;
const FLOOR: f64 = 1e-8;
const SCALES: [f64; 6] = [1.0, 0.3, 0.1, 0.03, 0.01, 0.001];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdeOptions {
    pub restarts: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CdeOptions {
    fn default() -> Self {
        Self { restarts: 32, samples: 512, seed: 0, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCurvature {
    pub vertex: usize,
    #[serde(with = "crate::report::extended_float")]
    pub n: f64,
    pub k_star: f64,
    /// Full-length witness; entries outside the 2-ball are 1 and never read.
    pub witness: Vec<f64>,
    pub converged: bool,
    pub restarts_used: usize,
    pub evaluations: usize,
    /// `Δf*(x)`, which approaches zero when the infimum sits on the boundary.
    pub witness_laplacian: f64,
    pub witness_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    #[serde(with = "crate::report::extended_float")]
    pub n: f64,
    pub options: CdeOptions,
    pub vertices: Vec<VertexCurvature>,
}

impl CurvatureReport {
    pub fn min_k(&self) -> f64 {
        self.vertices.iter().map(|v| v.k_star).fold(f64::INFINITY, f64::min)
    }

    pub fn max_k(&self) -> f64 {
        self.vertices.iter().map(|v| v.k_star).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_vertex(&self) -> Option<usize> {
        self.vertices.iter().min_by(|a, b| a.k_star.total_cmp(&b.k_star)).map(|v| v.vertex)
    }
}

impl Emit for CurvatureReport {
    fn table(&self) -> Table {
        let mut table = Table::new(vec!["vertex", "n", "K_star", "converged", "restarts_used"]);
        for v in &self.vertices {
            table.push(vec![
                v.vertex.to_string(),
                fmt_float(v.n),
                fmt_float(v.k_star),
                v.converged.to_string(),
                v.restarts_used.to_string(),
            ]);
        }
        table
    }

    fn json(&self) -> Result<String> {
        to_json_string(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdeVerdict {
    pub passed: bool,
    #[serde(with = "crate::report::extended_float")]
    pub n: f64,
    pub k: f64,
    pub tol: f64,
    pub min_k_star: f64,
    pub worst_vertex: usize,
}

/// `(Γ̃₂(f) − (Δf)²/n) / Γ(f)` at `x`; `n = ∞` drops the `(Δf)²` term.
pub fn cde_functional(g: &WeightedGraph, x: usize, n: f64, f: &[f64]) -> Result<f64> {
    g.check_vertex(x)?;
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
    }
    if f.len() != g.vertex_count() {
        return Err(Error::LengthMismatch { expected: g.vertex_count(), got: f.len() });
    }
    if let Some(y) = g.ball(x, 2).into_iter().find(|&y| !(f[y] > 0.0)) {
        return Err(Error::NonPositive { vertex: y, value: f[y] });
    }
    let lap = laplacian(g, f, x);
    if !(lap < 0.0) {
        return Err(Error::Precondition(format!("Δf(x) = {lap} is not negative")));
    }
    let grad = gamma(g, f, f, x);
    if !(grad > 0.0) {
        return Err(Error::Precondition(format!("Γ(f)(x) = {grad} is not positive")));
    }
    Ok(functional_unchecked(g, x, n, f, lap, grad))
}

fn functional_unchecked(g: &WeightedGraph, x: usize, n: f64, f: &[f64], lap: f64, grad: f64) -> f64 {
    let g2 = gamma2_tilde(g, f, x).unwrap_or(f64::NAN);
    let dim_term = if n.is_infinite() { 0.0 } else { lap * lap / n };
    (g2 - dim_term) / grad
}

/// Multistart Nelder-Mead over `log f` on the punctured 2-ball with `f(x) = 1`.
pub fn cde_best_k(g: &WeightedGraph, x: usize, n: f64, opts: &CdeOptions) -> Result<VertexCurvature> {
    g.check_vertex(x)?;
    if g.neighbors(x).is_empty() {
        return Err(Error::Precondition(format!("vertex {x} has no neighbors")));
    }
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let coords: Vec<usize> = g.ball(x, 2).into_iter().filter(|&y| y != x).collect();
    let build = |theta: &[f64]| {
        let mut f = vec![1.0; g.vertex_count()];
        for (&y, &t) in coords.iter().zip(theta) {
            f[y] = t.exp().max(FLOOR);
        }
        f
    };
    let objective = |theta: &[f64]| {
        let f = build(theta);
        let lap = laplacian(g, &f, x);
        if lap > LAPLACIAN_CEILING {
            return 1e6 * (1.0 + lap - LAPLACIAN_CEILING);
        }
        let grad = gamma(g, &f, &f, x);
        functional_unchecked(g, x, n, &f, lap, grad)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(x as u64);
    let mut starts: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(opts.samples);
    for i in 0..opts.samples {
        let scale = SCALES[i % SCALES.len()];
        let mut theta: Vec<f64> = coords.iter().map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let mut value = objective(&theta);
        if value >= 1e6 {
            theta.iter_mut().for_each(|t| *t = -*t);
            value = objective(&theta);
        }
        if value < 1e6 && value.is_finite() {
            starts.push((value, scale, theta));
        }
    }
    if starts.is_empty() {
        return Err(Error::Precondition(format!("no admissible starting point found at vertex {x}")));
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.truncate(opts.restarts.max(1));

    let nm = NelderMeadOptions { f_tol: opts.tol * 1e-3, x_tol: 1e-9, max_evals: 400 * (coords.len() + 1) };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut evaluations = opts.samples;
    let restarts_used = starts.len();
    for (_, scale, theta) in starts {
        let mut m = nelder_mead(objective, &theta, 0.5 * scale, nm);
        evaluations += m.evals;
        // A second pass from the result escapes premature simplex collapse.
        let step = 0.25 * m.x.iter().fold(0.0f64, |s, t| s.max(t.abs())).max(1e-6);
        let again = nelder_mead(objective, &m.x, step, nm);
        evaluations += again.evals;
        if again.value <= m.value {
            m = again;
        }
        if best.as_ref().is_none_or(|b| m.value < b.0) {
            best = Some((m.value, m.x, m.converged));
        }
    }
    let (_, theta, converged) = best.expect("at least one start");
    let witness = build(&theta);
    let k_star = cde_functional(g, x, n, &witness)?;
    Ok(VertexCurvature {
        vertex: x,
        n,
        k_star,
        witness_laplacian: laplacian(g, &witness, x),
        witness_gamma: gamma(g, &witness, &witness, x),
        witness,
        converged,
        restarts_used,
        evaluations,
    })
}

/// `K*(x, n)` at every vertex, in parallel; deterministic for a fixed seed.
pub fn curvature_report(g: &WeightedGraph, n: f64, opts: &CdeOptions) -> Result<CurvatureReport> {
    let vertices =
        (0..g.vertex_count()).into_par_iter().map(|x| cde_best_k(g, x, n, opts)).collect::<Result<Vec<_>>>()?;
    Ok(CurvatureReport { n, options: *opts, vertices })
}

/// Passes iff `min_x K*(x, n) ≥ K − tol` ("no violation found").
pub fn cde_holds(g: &WeightedGraph, n: f64, k: f64, tol: f64, opts: &CdeOptions) -> Result<CdeVerdict> {
    let report = curvature_report(g, n, opts)?;
    Ok(verdict(&report, k, tol))
}

pub fn verdict(report: &CurvatureReport, k: f64, tol: f64) -> CdeVerdict {
    let min_k_star = report.min_k();
    CdeVerdict {
        passed: min_k_star >= k - tol,
        n: report.n,
        k,
        tol,
        min_k_star,
        worst_vertex: report.worst_vertex().unwrap_or(0),
    }
}
