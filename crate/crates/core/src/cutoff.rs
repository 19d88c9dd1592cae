//! Cut-off functions around a center vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::operators::{gamma_with, laplacian_with};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CutoffKind {
    /// Hop-distance ramp: 1 inside `R`, linear on `[R, 2R]`, 0 beyond.
    Basic,
    /// User-supplied candidate for a `(c, R)`-strong cut-off supported on `support`.
    Strong { c: f64, support: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub values: Vec<f64>,
    pub center: usize,
    pub radius: usize,
    pub kind: CutoffKind,
}

impl CutoffFunction {
    /// The basic ramp cut-off centered at `center` with integer radius `radius ≥ 1`.
    pub fn build(g: &WeightedGraph, center: usize, radius: usize) -> Result<Self> {
        g.check_vertex(center)?;
        if radius == 0 {
            return Err(Error::InvalidArgument("cut-off radius must be at least 1".into()));
        }
        let r = radius as f64;
        let values = g
            .distances_from(center)
            .into_iter()
            .map(|d| match d {
                Some(d) if d < radius => 1.0,
                Some(d) if d <= 2 * radius => (2.0 * r - d as f64) / r,
                _ => 0.0,
            })
            .collect();
        Ok(Self { values, center, radius, kind: CutoffKind::Basic })
    }

    /// Wraps arbitrary values as a strong cut-off candidate. The support is
    /// taken to be every vertex with a positive value unless given.
    pub fn strong(
        g: &WeightedGraph,
        values: Vec<f64>,
        center: usize,
        radius: usize,
        c: f64,
        support: Option<Vec<usize>>,
    ) -> Result<Self> {
        g.check_vertex(center)?;
        if values.len() != g.vertex_count() {
            return Err(Error::LengthMismatch { expected: g.vertex_count(), got: values.len() });
        }
        if radius == 0 || !(c > 0.0) {
            return Err(Error::InvalidArgument("strong cut-off needs R >= 1 and c > 0".into()));
        }
        if let Some(bad) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!("cut-off value at {bad} is outside [0, 1]")));
        }
        let mut support = support.unwrap_or_else(|| (0..values.len()).filter(|&x| values[x] > 0.0).collect());
        support.sort_unstable();
        support.dedup();
        if let Some(&bad) = support.iter().find(|&&x| x >= values.len()) {
            return Err(Error::VertexOutOfRange(bad));
        }
        Ok(Self { values, center, radius, kind: CutoffKind::Strong { c, support } })
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }
}

/// Why a vertex fails the strong cut-off conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrongCutoffViolation {
    /// `φ(x0) ≠ 1`.
    CenterNotOne { value: f64 },
    /// `φ` is nonzero at a vertex outside the support.
    NonzeroOffSupport { vertex: usize, value: f64 },
    /// Above the small-value threshold but a neighbor has `φ = 0`.
    ZeroNeighbor { vertex: usize, neighbor: usize },
    /// `φ²Δ(1/φ)` exceeds `D_μ c(1+R√K)/R²`.
    LaplacianBound { vertex: usize, value: f64, bound: f64 },
    /// `φ³Γ(1/φ)` exceeds `D_μ c/R²`.
    GradientBound { vertex: usize, value: f64, bound: f64 },
}

impl StrongCutoffViolation {
    pub fn vertex(&self) -> Option<usize> {
        match *self {
            Self::CenterNotOne { .. } => None,
            Self::NonzeroOffSupport { vertex, .. }
            | Self::ZeroNeighbor { vertex, .. }
            | Self::LaplacianBound { vertex, .. }
            | Self::GradientBound { vertex, .. } => Some(vertex),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongCutoffReport {
    pub small_threshold: f64,
    pub laplacian_bound: f64,
    pub gradient_bound: f64,
    /// Vertices that passed through the small-value branch.
    pub small_branch: usize,
    /// Vertices that needed the operator inequalities.
    pub operator_branch: usize,
    pub violation: Option<StrongCutoffViolation>,
}

impl StrongCutoffReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the `(c, R)`-strong cut-off conditions for `phi` under curvature
/// parameter `K ≥ 0`. `c` and the support come from `phi` when it is a strong
/// candidate; a basic cut-off is checked with `c` from the argument and the
/// support `{φ > 0}`. `n` only parametrizes `c` and is not otherwise used.
pub fn strong_cutoff_verify(
    g: &WeightedGraph,
    phi: &CutoffFunction,
    _n: f64,
    k: f64,
    c: f64,
) -> Result<StrongCutoffReport> {
    if phi.values.len() != g.vertex_count() {
        return Err(Error::LengthMismatch { expected: g.vertex_count(), got: phi.values.len() });
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidArgument("K must be nonnegative".into()));
    }
    let (c, support) = match &phi.kind {
        CutoffKind::Strong { c, support } => (*c, support.clone()),
        CutoffKind::Basic => (c, (0..g.vertex_count()).filter(|&x| phi.values[x] > 0.0).collect()),
    };
    let r = phi.radius as f64;
    let d_mu = g.bounds().d_mu;
    let small_threshold = c * (1.0 + r * k.sqrt()) / (2.0 * r * r);
    let laplacian_bound = d_mu * c * (1.0 + r * k.sqrt()) / (r * r);
    let gradient_bound = d_mu * c / (r * r);
    let mut report = StrongCutoffReport {
        small_threshold,
        laplacian_bound,
        gradient_bound,
        small_branch: 0,
        operator_branch: 0,
        violation: None,
    };

    let phi_v = &phi.values;
    if phi_v[phi.center] != 1.0 {
        report.violation = Some(StrongCutoffViolation::CenterNotOne { value: phi_v[phi.center] });
        return Ok(report);
    }
    let mut in_support = vec![false; g.vertex_count()];
    for &x in &support {
        in_support[x] = true;
    }
    if let Some(x) = (0..g.vertex_count()).find(|&x| !in_support[x] && phi_v[x] != 0.0) {
        report.violation = Some(StrongCutoffViolation::NonzeroOffSupport { vertex: x, value: phi_v[x] });
        return Ok(report);
    }

    for &x in &support {
        if phi_v[x] <= small_threshold {
            report.small_branch += 1;
            continue;
        }
        report.operator_branch += 1;
        if let Some(&(y, _)) = g.neighbors(x).iter().find(|&&(y, _)| phi_v[y] == 0.0) {
            report.violation = Some(StrongCutoffViolation::ZeroNeighbor { vertex: x, neighbor: y });
            return Ok(report);
        }
        let inv = |y: usize| 1.0 / phi_v[y];
        let p = phi_v[x];
        let lap = p * p * laplacian_with(g, x, inv);
        if lap > laplacian_bound {
            report.violation =
                Some(StrongCutoffViolation::LaplacianBound { vertex: x, value: lap, bound: laplacian_bound });
            return Ok(report);
        }
        let grad = p * p * p * gamma_with(g, x, inv, inv);
        if grad > gradient_bound {
            report.violation =
                Some(StrongCutoffViolation::GradientBound { vertex: x, value: grad, bound: gradient_bound });
            return Ok(report);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, MeasureKind, Weighting};

    #[test]
    fn basic_ramp_cases() {
        let g = generate(Family::Path(12), Weighting::Unit, MeasureKind::Unit).unwrap();
        let phi = CutoffFunction::build(&g, 0, 3).unwrap();
        assert_eq!(&phi.values[..3], &[1.0, 1.0, 1.0]);
        assert_eq!(phi.values[3], 1.0);
        assert_eq!(phi.values[5], 1.0 / 3.0);
        assert_eq!(phi.values[6], 0.0);
        assert!(phi.values[7..].iter().all(|&v| v == 0.0));
        assert!(CutoffFunction::build(&g, 0, 0).is_err());
    }

    #[test]
    fn indicator_of_center_fails_on_triangle() {
        let g = generate(Family::Complete(3), Weighting::Unit, MeasureKind::Unit).unwrap();
        let phi = CutoffFunction::strong(&g, vec![1.0, 0.0, 0.0], 0, 1, 1.0, Some(vec![0, 1, 2])).unwrap();
        let report = strong_cutoff_verify(&g, &phi, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(report.violation, Some(StrongCutoffViolation::ZeroNeighbor { vertex: 0, neighbor: 1 }));
    }

    #[test]
    fn everything_small_passes() {
        let g = generate(Family::Cycle(8), Weighting::Unit, MeasureKind::Unit).unwrap();
        let mut values = vec![0.5; 8];
        values[0] = 1.0;
        // R = 2, c = 6: threshold 0.75 covers the non-center vertices. At the
        // center φ²Δ(1/φ) = 2 and φ³Γ(1/φ) = 1, both under D_μ c/R² = 3.
        let phi = CutoffFunction::strong(&g, values, 0, 2, 6.0, None).unwrap();
        let report = strong_cutoff_verify(&g, &phi, 2.0, 0.0, 6.0).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!((report.small_branch, report.operator_branch), (7, 1));

        let tight = CutoffFunction::strong(&g, phi.values.clone(), 0, 2, 3.0, None).unwrap();
        let report = strong_cutoff_verify(&g, &tight, 2.0, 0.0, 3.0).unwrap();
        assert!(matches!(report.violation, Some(StrongCutoffViolation::LaplacianBound { vertex: 0, .. })));
    }

    #[test]
    fn center_must_be_one() {
        let g = generate(Family::Cycle(5), Weighting::Unit, MeasureKind::Unit).unwrap();
        let phi = CutoffFunction::strong(&g, vec![0.5; 5], 0, 1, 1.0, None).unwrap();
        let report = strong_cutoff_verify(&g, &phi, 2.0, 0.0, 1.0).unwrap();
        assert!(matches!(report.violation, Some(StrongCutoffViolation::CenterNotOne { .. })));
    }
}
