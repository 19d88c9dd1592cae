//! Exact heat semigroup `e^{tΔ}` through a symmetrized eigendecomposition.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::operators::{laplacian_all, VertexFunction};

/// Spectral factorization of `Δ = M⁻¹(W − Deg)`.
///
/// `S = M^{-1/2}(W − Deg)M^{-1/2} = QΛQᵀ`, so `e^{tΔ} = M^{-1/2} Q e^{tΛ} Qᵀ M^{1/2}`.
#[derive(Debug, Clone)]
pub struct HeatPropagator {
    graph: WeightedGraph,
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
    sqrt_mu: Vec<f64>,
}

impl HeatPropagator {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.vertex_count();
        let sqrt_mu: Vec<f64> = g.measures().iter().map(|m| m.sqrt()).collect();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for x in 0..n {
            s[(x, x)] = -g.degree(x) / g.measure(x);
            for &(y, w) in g.neighbors(x) {
                s[(x, y)] = w / (sqrt_mu[x] * sqrt_mu[y]);
            }
        }
        let eigen = SymmetricEigen::new(s);
        // Nonpositive up to rounding; the constant mode sits at ~1e-16.
        let eigenvalues = eigen.eigenvalues.map(|l| l.min(0.0));
        Self { graph: g.clone(), eigenvalues, basis: eigen.eigenvectors, sqrt_mu }
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Eigenvalues of `Δ` (all `≤ 0`), unordered.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    /// Eigenvectors of `Δ` normalized in `ℓ²(μ)`, one per column.
    pub fn mu_orthonormal_basis(&self) -> DMatrix<f64> {
        let mut b = self.basis.clone();
        for (x, mut row) in b.row_iter_mut().enumerate() {
            row /= self.sqrt_mu[x];
        }
        b
    }

    /// Spectral coefficients `Qᵀ M^{1/2} u`.
    fn coefficients(&self, u: &[f64]) -> DVector<f64> {
        let v = DVector::from_iterator(u.len(), u.iter().zip(&self.sqrt_mu).map(|(u, s)| u * s));
        self.basis.tr_mul(&v)
    }

    /// `M^{-1/2} Q diag(weights) c`.
    fn synthesize(&self, coeffs: &DVector<f64>, weight: impl Fn(f64) -> f64) -> Vec<f64> {
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(self.eigenvalues.iter()).map(|(c, &l)| c * weight(l)),
        );
        let v = &self.basis * scaled;
        v.iter().zip(&self.sqrt_mu).map(|(v, s)| v / s).collect()
    }

    /// `e^{tΔ}u`.
    pub fn propagate(&self, u: &[f64], t: f64) -> Vec<f64> {
        self.synthesize(&self.coefficients(u), |l| (t * l).exp())
    }

    /// The full matrix `e^{tΔ}` acting on column vectors.
    pub fn semigroup_matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.sqrt_mu.len();
        let h = self.symmetric_part(t);
        DMatrix::from_fn(n, n, |x, y| h[(x, y)] * self.sqrt_mu[y] / self.sqrt_mu[x])
    }

    fn symmetric_part(&self, t: f64) -> DMatrix<f64> {
        let decay = self.eigenvalues.map(|l| (t * l).exp());
        let mut scaled = self.basis.clone();
        for (mut col, d) in scaled.column_iter_mut().zip(decay.iter()) {
            col *= *d;
        }
        scaled * self.basis.transpose()
    }

    /// The heat kernel `p_t(x, y) = (e^{tΔ})_{xy}/μ(y)`.
    pub fn heat_kernel(&self, t: f64) -> Result<HeatKernel> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("heat kernel needs t > 0, got {t}")));
        }
        let n = self.sqrt_mu.len();
        let h = self.symmetric_part(t);
        let values = DMatrix::from_fn(n, n, |x, y| {
            let v = 0.5 * (h[(x, y)] + h[(y, x)]);
            v / (self.sqrt_mu[x] * self.sqrt_mu[y])
        });
        Ok(HeatKernel { t, values })
    }
}

/// `p_t` as a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    pub t: f64,
    pub values: DMatrix<f64>,
}

impl HeatKernel {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[(x, y)]
    }
}

/// `p_t` on `g`. Factorizes from scratch; reuse a [`HeatPropagator`] for sweeps.
pub fn heat_kernel(g: &WeightedGraph, t: f64) -> Result<HeatKernel> {
    HeatPropagator::new(g).heat_kernel(t)
}

/// A solved trajectory `u(·, t_j) = e^{t_jΔ}u0` on a time grid.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    propagator: Arc<HeatPropagator>,
    u0: Vec<f64>,
    coeffs: DVector<f64>,
    times: Vec<f64>,
    slices: Vec<Vec<f64>>,
}

/// Solves `∂_t u = Δu` from `u0` on `times`.
pub fn evolve(g: &WeightedGraph, u0: &[f64], times: &[f64]) -> Result<HeatSolution> {
    HeatSolution::new(Arc::new(HeatPropagator::new(g)), u0, times)
}

impl HeatSolution {
    pub fn new(propagator: Arc<HeatPropagator>, u0: &[f64], times: &[f64]) -> Result<Self> {
        let n = propagator.graph().vertex_count();
        if u0.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: u0.len() });
        }
        if u0.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInitialData("u0 must be finite and nonnegative".into()));
        }
        if u0.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInitialData("u0 vanishes identically".into()));
        }
        check_time_grid(times)?;
        let coeffs = propagator.coefficients(u0);
        let slices = times.iter().map(|&t| propagator.synthesize(&coeffs, |l| (t * l).exp())).collect();
        Ok(Self { propagator, u0: u0.to_vec(), coeffs, times: times.to_vec(), slices })
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.propagator.graph()
    }

    pub fn propagator(&self) -> &Arc<HeatPropagator> {
        &self.propagator
    }

    pub fn initial(&self) -> &[f64] {
        &self.u0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        &self.slices[j]
    }

    pub fn slices(&self) -> &[Vec<f64>] {
        &self.slices
    }

    pub fn value(&self, x: usize, j: usize) -> f64 {
        self.slices[j][x]
    }

    /// `u(·, t)` at an arbitrary `t ≥ 0`, re-evaluated spectrally.
    pub fn at(&self, t: f64) -> Vec<f64> {
        self.propagator.synthesize(&self.coeffs, |l| (t * l).exp())
    }

    /// `∂_t u(·, t)` computed spectrally, `Σ λ_i e^{tλ_i} c_i φ_i`.
    pub fn time_derivative_at(&self, t: f64) -> Vec<f64> {
        self.propagator.synthesize(&self.coeffs, |l| l * (t * l).exp())
    }

    /// `Δu(·, t_j)` from the slice.
    pub fn laplacian_slice(&self, j: usize) -> Vec<f64> {
        laplacian_all(self.graph(), &self.slices[j])
    }

    pub fn slice_function(&self, j: usize) -> VertexFunction {
        VertexFunction::new(self.graph(), self.slices[j].clone()).expect("slice length matches graph")
    }

    /// `Σ_x μ(x) u(x, t_j)`.
    pub fn mass(&self, j: usize) -> f64 {
        self.slices[j].iter().zip(self.graph().measures()).map(|(u, m)| u * m).sum()
    }

    /// `∂_t(√u)/√u = Δu/(2u)` at `(x, t)`.
    pub fn sqrt_time_derivative(&self, x: usize, t: f64) -> Result<f64> {
        self.graph().check_vertex(x)?;
        let u = match self.time_index(t) {
            Some(j) => self.slices[j].clone(),
            None => self.at(t),
        };
        if !(u[x] > 0.0) {
            return Err(Error::NonPositive { vertex: x, value: u[x] });
        }
        Ok(crate::operators::laplacian(self.graph(), &u, x) / (2.0 * u[x]))
    }

    /// Index of a grid time equal to `t` up to `1e-12` relative.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    /// Rows `(t, vertex, u)` for CSV export.
    pub fn rows(&self) -> Vec<HeatRow> {
        self.times
            .iter()
            .zip(&self.slices)
            .flat_map(|(&t, slice)| slice.iter().enumerate().map(move |(vertex, &u)| HeatRow { t, vertex, u }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRow {
    pub t: f64,
    pub vertex: usize,
    pub u: f64,
}

pub fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidTimeGrid("empty grid".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidTimeGrid("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// `m` log-spaced points on `[a, b]`, endpoints exact.
pub fn log_grid(a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > a) || m < 2 {
        return Err(Error::InvalidTimeGrid(format!("log grid needs 0 < a < b and m >= 2, got {a}, {b}, {m}")));
    }
    let (la, lb) = (a.ln(), b.ln());
    let mut grid: Vec<f64> = (0..m).map(|i| (la + (lb - la) * i as f64 / (m - 1) as f64).exp()).collect();
    grid[0] = a;
    grid[m - 1] = b;
    Ok(grid)
}

/// `m` evenly spaced points on `[a, b]`.
pub fn linear_grid(a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    if !(a >= 0.0 && b > a) || m < 2 {
        return Err(Error::InvalidTimeGrid(format!("linear grid needs 0 <= a < b and m >= 2, got {a}, {b}, {m}")));
    }
    Ok((0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect())
}

/// `u0 = 1` at `seed` and `floor` elsewhere.
pub fn delta_like(g: &WeightedGraph, seed: usize, floor: f64) -> Result<Vec<f64>> {
    g.check_vertex(seed)?;
    let mut u = vec![floor; g.vertex_count()];
    u[seed] = 1.0;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, MeasureKind, Weighting};

    fn edge() -> WeightedGraph {
        WeightedGraph::new(2, &[(0, 1, 1.0)], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn single_edge_closed_form() {
        let sol = evolve(&edge(), &[1.0, 0.0], &[0.0, 0.5, 1.0, 3.0]).unwrap();
        for (j, &t) in sol.times().iter().enumerate() {
            let e = (-2.0 * t).exp();
            assert!((sol.value(0, j) - 0.5 * (1.0 + e)).abs() < 1e-14);
            assert!((sol.value(1, j) - 0.5 * (1.0 - e)).abs() < 1e-14);
        }
        let k = heat_kernel(&edge(), 1.0).unwrap();
        assert!((k.get(0, 0) - 0.5 * (1.0 + (-2f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn constants_are_stationary() {
        let g = generate(Family::Cycle(6), Weighting::Random(3), MeasureKind::Random(4)).unwrap();
        let sol = evolve(&g, &[2.5; 6], &[0.0, 1.0, 10.0]).unwrap();
        for s in sol.slices() {
            assert!(s.iter().all(|v| (v - 2.5).abs() < 1e-13));
        }
    }

    #[test]
    fn kernel_converges_to_inverse_volume() {
        let g = generate(Family::Path(4), Weighting::Unit, MeasureKind::Degree).unwrap();
        let k = heat_kernel(&g, 200.0).unwrap();
        let vol = g.total_measure();
        assert!(k.values.iter().all(|p| (p - 1.0 / vol).abs() < 1e-12));
    }

    #[test]
    fn sqrt_time_derivative_on_edge() {
        let sol = evolve(&edge(), &[1.0, 0.0], &[1.0]).unwrap();
        let e = (-2f64).exp();
        let (u0, u1) = (0.5 * (1.0 + e), 0.5 * (1.0 - e));
        let expected = (u1 - u0) / (2.0 * u0);
        assert!((sol.sqrt_time_derivative(0, 1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn bad_inputs() {
        let g = edge();
        assert!(matches!(evolve(&g, &[1.0, 0.0], &[]), Err(Error::InvalidTimeGrid(_))));
        assert!(matches!(evolve(&g, &[1.0, 0.0], &[-1.0, 1.0]), Err(Error::InvalidTimeGrid(_))));
        assert!(matches!(evolve(&g, &[1.0, 0.0], &[1.0, 1.0]), Err(Error::InvalidTimeGrid(_))));
        assert!(matches!(evolve(&g, &[0.0, 0.0], &[1.0]), Err(Error::InvalidInitialData(_))));
        assert!(matches!(evolve(&g, &[-1.0, 2.0], &[1.0]), Err(Error::InvalidInitialData(_))));
        assert!(heat_kernel(&g, 0.0).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let grid = log_grid(0.05, 5.0, 25).unwrap();
        assert_eq!((grid[0], grid[24]), (0.05, 5.0));
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}
