use licurv::graph::{generate, Family, MeasureKind, WeightedGraph, Weighting};
use licurv::harnack::{
    harnack_check, kernel_bounds_check, lemma51_check, rho_bound_remark, rho_compute, walk_lengths, Alpha,
    BoundVariant, RemarkBound,
};
use licurv::heat::{delta_like, evolve};
use licurv::profiles::RateProfile;

fn unit(family: Family) -> WeightedGraph {
    generate(family, Weighting::Unit, MeasureKind::Unit).unwrap()
}

/// Composite Simpson for `∫_{t0}^{t1} (t1 − u) α(u) du`.
fn segment_oracle(alpha: impl Fn(f64) -> f64, t0: f64, t1: f64) -> f64 {
    let m = 2000;
    let h = (t1 - t0) / m as f64;
    let f = |u: f64| (t1 - u) * alpha(u);
    let mut s = f(t0) + f(t1);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t0 + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn constant_alpha_has_a_closed_form() {
    // cost(k) = 2μ_max k²/(ω_min ΔT), minimized at the distance.
    let g = generate(Family::Cycle(7), Weighting::Unit, MeasureKind::Degree).unwrap();
    for y in 0..7 {
        let r = rho_compute(&g, 0, y, 0.5, 2.0, &Alpha::Const(1.0), None).unwrap();
        let d = g.distance(0, y).unwrap() as f64;
        assert_eq!(r.k_star, d as usize);
        assert!((r.rho - 2.0 * 2.0 * d * d / 1.5).abs() < 1e-12);
    }
}

#[test]
fn segments_match_quadrature() {
    let alphas =
        [Alpha::Const(2.5), Alpha::Affine { a: 1.0, b: 0.7 }, Alpha::function("exp", |t: f64| (0.4 * t).exp())];
    for a in &alphas {
        for (t0, t1) in [(0.1, 0.4), (1.0, 3.0)] {
            let want = segment_oracle(|u| a.eval(u), t0, t1);
            assert!((a.segment(t0, t1).unwrap() - want).abs() < 1e-11, "{a:?}");
        }
    }
}

#[test]
fn bipartite_graphs_only_allow_matching_parity() {
    let g = unit(Family::Cycle(6));
    let feasible = walk_lengths(&g, 0, 2, 12);
    for (k, ok) in feasible.iter().enumerate() {
        assert_eq!(*ok, k >= 2 && k % 2 == 0, "k={k}");
    }
    let odd = unit(Family::Cycle(5));
    let feasible = walk_lengths(&odd, 0, 1, 8);
    assert!(feasible[1] && feasible[3] && feasible[4] && !feasible[2]);
    let r = rho_compute(&g, 0, 3, 1.0, 2.0, &Alpha::Const(1.0), None).unwrap();
    assert!(r.costs.iter().all(|(k, _)| k % 2 == 1));
}

#[test]
fn same_vertex_costs_nothing() {
    let g = unit(Family::Hypercube(3));
    let r = rho_compute(&g, 4, 4, 1.0, 3.0, &Alpha::Affine { a: 1.0, b: 1.0 }, None).unwrap();
    assert_eq!((r.k_star, r.rho), (0, 0.0));
}

#[test]
fn symmetric_for_constant_alpha() {
    let g = generate(Family::Random { n: 10, p: 0.3, seed: 4 }, Weighting::Random(5), MeasureKind::Random(6)).unwrap();
    for (x, y) in [(0, 7), (2, 9), (3, 5)] {
        let a = rho_compute(&g, x, y, 0.5, 1.7, &Alpha::Const(1.3), None).unwrap();
        let b = rho_compute(&g, y, x, 0.5, 1.7, &Alpha::Const(1.3), None).unwrap();
        assert_eq!(a.rho, b.rho);
    }
}

#[test]
fn cost_grows_with_walk_length_for_increasing_alpha() {
    let g = unit(Family::Path(6));
    let r = rho_compute(&g, 0, 3, 1.0, 2.0, &Alpha::Affine { a: 1.0, b: 0.5 }, Some(15)).unwrap();
    assert!(r.costs.windows(2).all(|w| w[1].1 > w[0].1));
    assert_eq!(r.k_star, 3);
}

#[test]
fn invalid_times_are_rejected() {
    let g = unit(Family::Path(3));
    assert!(rho_compute(&g, 0, 2, 2.0, 1.0, &Alpha::Const(1.0), None).is_err());
    assert!(rho_compute(&g, 0, 2, 0.0, 1.0, &Alpha::Const(1.0), None).is_err());
    assert!(rho_compute(&g, 0, 2, 1.0, 2.0, &Alpha::Const(1.0), Some(1)).is_err());
}

#[test]
fn closed_form_bounds_dominate_rho() {
    let g = generate(Family::Torus { dim: 2, side: 5 }, Weighting::Unit, MeasureKind::Degree).unwrap();
    let b = g.bounds();
    let cases: [(RemarkBound, f64, f64, f64); 4] = [
        (RemarkBound::Power { gamma: 2.0 }, 0.5, 1.0, 2.5),
        (RemarkBound::SinhCoth, 0.4, 0.8, 2.0),
        (RemarkBound::SinhSmall { delta: 0.9 }, 0.2, 1.0, 2.0),
        (RemarkBound::SinhLog, 0.4, 1.0, 1.5),
    ];
    for (bound, k, t1, t2) in cases {
        for y in [1, 6, 12] {
            let d = g.distance(0, y).unwrap();
            let rho = rho_compute(&g, 0, y, t1, t2, &bound.alpha(k), None).unwrap().rho;
            let variant = BoundVariant::Corrected;
            let ub = rho_bound_remark(bound, variant, k, d, t1, t2, b.mu_max, b.omega_min).unwrap();
            assert!(rho <= ub * (1.0 + 1e-12), "{} y={y}: {rho} > {ub}", bound.name());
        }
    }
}

#[test]
fn corrected_log_bound_is_the_displayed_one_rescaled() {
    let (k, d, t1, t2) = (0.5, 2, 1.0, 1.8);
    let shown = rho_bound_remark(RemarkBound::SinhLog, BoundVariant::Displayed, k, d, t1, t2, 1.0, 1.0).unwrap();
    let fixed = rho_bound_remark(RemarkBound::SinhLog, BoundVariant::Corrected, k, d, t1, t2, 1.0, 1.0).unwrap();
    let pre = 2.0 * 4.0 / (t2 - t1);
    assert!(((shown / pre - 1.0) / (fixed / pre - 1.0) - (t2 - t1)).abs() < 1e-12);
}

#[test]
fn lemma_bound_holds_for_several_psi() {
    type Psi = fn(f64) -> f64;
    let psis: [(&str, Psi); 3] = [("1/t", |t| 1.0 / t), ("const", |_| 0.7), ("sin", |t| 1.0 + t.sin())];
    for (name, psi) in psis {
        let r = lemma51_check(psi, |t| 1.0 + 0.3 * t, 0.5, 2.0).unwrap();
        assert!(r.slack >= -1e-10, "{name}: {r:?}");
    }
}

#[test]
fn torus_harnack_forms_hold() {
    let g = generate(Family::Torus { dim: 2, side: 5 }, Weighting::Unit, MeasureKind::Degree).unwrap();
    let u0 = delta_like(&g, 0, 1e-6).unwrap();
    let (t1, t2) = (1.0, 2.0);
    let sol = evolve(&g, &u0, &[t1, t2]).unwrap();
    let p = RateProfile::power(2.0).unwrap();
    for y in [0, 1, 7, 12] {
        let c = harnack_check(&sol, 0, y, t1, t2, &p, 0.0, 4.0).unwrap();
        for name in ["general", "power", "zero"] {
            let f = c.form(name).unwrap_or_else(|| panic!("{name} missing"));
            assert!(f.slack >= -1e-9, "{name} y={y}: {f:?}");
        }
    }
    let p = RateProfile::sinh_sq();
    let sol = evolve(&g, &u0, &[0.5, 0.9]).unwrap();
    let c = harnack_check(&sol, 0, 1, 0.5, 0.9, &p, 0.3, 4.0).unwrap();
    for name in ["general", "sinh", "sinh-small"] {
        assert!(c.form(name).unwrap().slack >= -1e-9, "{name}");
    }
}

#[test]
fn kernel_report_shapes() {
    let g = generate(Family::Torus { dim: 2, side: 7 }, Weighting::Unit, MeasureKind::Degree).unwrap();
    let grid: Vec<f64> = (0..12).map(|i| 1.5 * (20.0f64 / 1.5).powf(i as f64 / 11.0)).collect();
    let r = kernel_bounds_check(&g, 0, 1, &grid, 0.0, 4.0).unwrap();
    assert!(r.band("upper").is_some() && r.band("lower").is_some() && r.band("upper-coth").is_none());
    assert!(r.lower_fit.min_residual >= 0.0);
    assert!(r.lower_fit.c3 >= 0.0);
    assert!(r.band("upper").unwrap().spread() < 10.0);
    let r = kernel_bounds_check(&g, 0, 1, &grid, 0.2, 4.0).unwrap();
    assert!(r.band("upper-coth").is_some());
    assert!(kernel_bounds_check(&g, 0, 1, &[0.5], 0.0, 4.0).is_err());
}
