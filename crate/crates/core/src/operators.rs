//! The μ-Laplacian and the carré du champ family built on it.
//!
//! All operators are local: `Δ` and `Γ` at `x` read the closed 1-ball, while
//! `Γ₂` and `Γ̃₂` read the 2-ball. They are evaluated pointwise in plain
//! double precision.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// One real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(g: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::LengthMismatch { expected: g.vertex_count(), got: values.len() });
        }
        Ok(Self(values))
    }

    pub fn constant(g: &WeightedGraph, c: f64) -> Self {
        Self(vec![c; g.vertex_count()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sqrt(&self) -> Self {
        Self(self.0.iter().map(|v| v.sqrt()).collect())
    }
}

impl Deref for VertexFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `Δh(x)` for a function given by a closure (only neighbors of `x` are read).
pub fn laplacian_with(g: &WeightedGraph, x: usize, h: impl Fn(usize) -> f64) -> f64 {
    let hx = h(x);
    let sum: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (h(y) - hx)).sum();
    sum / g.measure(x)
}

/// `Γ(f, h)(x)` for closure-valued functions.
pub fn gamma_with(g: &WeightedGraph, x: usize, f: impl Fn(usize) -> f64, h: impl Fn(usize) -> f64) -> f64 {
    let (fx, hx) = (f(x), h(x));
    let sum: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (f(y) - fx) * (h(y) - hx)).sum();
    sum / (2.0 * g.measure(x))
}

/// `Δf(x) = (1/μ(x)) Σ_{y∼x} ω_xy (f(y) − f(x))`.
pub fn laplacian(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    laplacian_with(g, x, |y| f[y])
}

pub fn laplacian_all(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..g.vertex_count()).map(|x| laplacian(g, f, x)).collect()
}

/// `Γ(f, h)(x) = (1/2μ(x)) Σ_{y∼x} ω_xy (f(y) − f(x))(h(y) − h(x))`.
pub fn gamma(g: &WeightedGraph, f: &[f64], h: &[f64], x: usize) -> f64 {
    gamma_with(g, x, |y| f[y], |y| h[y])
}

pub fn gamma_all(g: &WeightedGraph, f: &[f64], h: &[f64]) -> Vec<f64> {
    (0..g.vertex_count()).map(|x| gamma(g, f, h, x)).collect()
}

/// Iterated carré du champ `Γ₂(f) = ½ΔΓ(f) − Γ(f, Δf)` at `x`.
pub fn gamma2(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let half_lap_gamma = 0.5 * laplacian_with(g, x, |y| gamma(g, f, f, y));
    half_lap_gamma - gamma_with(g, x, |y| f[y], |y| laplacian(g, f, y))
}

/// `Γ̃₂(f) = ½ΔΓ(f) − Γ(f, Δ(f²)/(2f))` at `x`.
///
/// The quotient `Δ(f²)/(2f)` is read on the closed 1-ball of `x`, so `f` must
/// be positive there.
pub fn gamma2_tilde(g: &WeightedGraph, f: &[f64], x: usize) -> Result<f64> {
    require_positive(g, f, x)?;
    let quotient = |y: usize| laplacian_with(g, y, |z| f[z] * f[z]) / (2.0 * f[y]);
    let half_lap_gamma = 0.5 * laplacian_with(g, x, |y| gamma(g, f, f, y));
    Ok(half_lap_gamma - gamma_with(g, x, |y| f[y], quotient))
}

/// `Δ√f − [Δf/(2√f) − Γ(√f)/√f]` at `x`; zero up to rounding for positive `f`.
pub fn sqrt_identity_residual(g: &WeightedGraph, f: &[f64], x: usize) -> Result<f64> {
    require_positive(g, f, x)?;
    let root = |y: usize| f[y].sqrt();
    let lhs = laplacian_with(g, x, root);
    let rx = root(x);
    let rhs = laplacian(g, f, x) / (2.0 * rx) - gamma_with(g, x, root, root) / rx;
    Ok(lhs - rhs)
}

/// Positivity on the closed 1-ball of `x`.
pub fn require_positive(g: &WeightedGraph, f: &[f64], x: usize) -> Result<()> {
    if f.len() != g.vertex_count() {
        return Err(Error::LengthMismatch { expected: g.vertex_count(), got: f.len() });
    }
    std::iter::once(x)
        .chain(g.neighbors(x).iter().map(|&(y, _)| y))
        .find(|&y| !(f[y] > 0.0))
        .map_or(Ok(()), |y| Err(Error::NonPositive { vertex: y, value: f[y] }))
}
