use proptest::prelude::*;

use licurv::curvature::cde_functional;
use licurv::cutoff::CutoffFunction;
use licurv::estimates::{liyau_global_check, InequalityReport};
use licurv::graph::{generate, Family, MeasureKind, WeightedGraph, Weighting};
use licurv::harnack::{harnack_check, lemma51_check, rho_compute, Alpha};
use licurv::heat::{evolve, heat_kernel};
use licurv::operators::{gamma, laplacian};
use licurv::profiles::RateProfile;

fn graph() -> impl Strategy<Value = WeightedGraph> {
    (4usize..11, 0.25f64..0.7, any::<u64>(), any::<u64>(), any::<u64>()).prop_map(|(n, p, s, w, m)| {
        generate(Family::Random { n, p, seed: s }, Weighting::Random(w), MeasureKind::Random(m)).unwrap()
    })
}

fn with_function() -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<f64>)> {
    graph().prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), prop::collection::vec(0.1f64..5.0, n), prop::collection::vec(-3.0f64..3.0, n))
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_by_parts((g, f, h) in with_function()) {
        let n = g.vertex_count();
        let mu = g.measures();
        let total: f64 = (0..n).map(|x| mu[x] * laplacian(&g, &h, x)).sum();
        let scale: f64 = (0..n).map(|x| (mu[x] * laplacian(&g, &h, x)).abs()).sum();
        prop_assert!(total.abs() <= 1e-11 * (1.0 + scale));
        let lhs: f64 = (0..n).map(|x| mu[x] * gamma(&g, &f, &h, x)).sum();
        let rhs: f64 = -(0..n).map(|x| mu[x] * f[x] * laplacian(&g, &h, x)).sum::<f64>();
        prop_assert!(rel_close(lhs, rhs, 1e-11));
    }

    #[test]
    fn operator_scaling((g, f, _h) in with_function(), c in 0.1f64..10.0) {
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        for x in 0..g.vertex_count() {
            prop_assert!(rel_close(laplacian(&g, &cf, x), c * laplacian(&g, &f, x), 1e-12));
            prop_assert!(rel_close(gamma(&g, &cf, &cf, x), c * c * gamma(&g, &f, &f, x), 1e-12));
            if let Ok(v) = cde_functional(&g, x, 4.0, &f) {
                prop_assert!(rel_close(cde_functional(&g, x, 4.0, &cf).unwrap(), v, 1e-10));
                prop_assert!(cde_functional(&g, x, f64::INFINITY, &f).unwrap() >= v - 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn weights_symmetric_and_degree_cached(g in graph()) {
        for (u, v, w) in g.edges() {
            prop_assert_eq!(g.weight(u, v), Some(w));
            prop_assert_eq!(g.weight(v, u), Some(w));
            prop_assert!(u != v && w > 0.0);
        }
        for x in 0..g.vertex_count() {
            let sum: f64 = g.neighbors(x).iter().map(|&(_, w)| w).sum();
            prop_assert_eq!(g.degree(x), sum);
        }
    }

    #[test]
    fn bounds_invariant_under_relabeling(g in graph(), shift in 1usize..10) {
        let n = g.vertex_count();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        prop_assume!({ let mut p = perm.clone(); p.sort_unstable(); p.dedup(); p.len() == n });
        let (a, b) = (g.relabeled(&perm).unwrap().bounds(), g.bounds());
        for (u, v) in [(a.omega_min, b.omega_min), (a.d_omega, b.d_omega), (a.d_mu, b.d_mu), (a.mu_max, b.mu_max)] {
            prop_assert!(rel_close(u, v, 1e-14));
        }
    }

    #[test]
    fn balls_grow_and_distances_obey_the_triangle_inequality(g in graph()) {
        let n = g.vertex_count();
        for x in 0..n {
            for r in 0..4 {
                let inner = g.ball(x, r);
                let outer = g.ball(x, r + 1);
                prop_assert!(inner.iter().all(|v| outer.contains(v)));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let (a, b, c) = (g.distance(x, y).unwrap(), g.distance(y, z).unwrap(), g.distance(x, z).unwrap());
                    prop_assert!(c <= a + b);
                }
            }
        }
    }

    #[test]
    fn cutoff_is_lipschitz(g in graph(), r in 1usize..4) {
        let phi = CutoffFunction::build(&g, 0, r).unwrap();
        for (u, v, _) in g.edges() {
            prop_assert!((phi.value(u) - phi.value(v)).abs() <= 1.0 / r as f64 + 1e-15);
        }
        prop_assert_eq!(phi.value(0), 1.0);
    }

    #[test]
    fn heat_mass_and_maximum_principle((g, f, _h) in with_function(), t in 0.01f64..5.0) {
        let sol = evolve(&g, &f, &[t]).unwrap();
        let m0: f64 = f.iter().zip(g.measures()).map(|(u, m)| u * m).sum();
        prop_assert!(rel_close(sol.mass(0), m0, 1e-10));
        let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for &u in sol.slice(0) {
            prop_assert!(u >= lo - 1e-12 * hi && u <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn semigroup_law(g in graph(), s in 0.05f64..1.0, t in 0.05f64..1.0) {
        let n = g.vertex_count();
        let (ps, pt, pst) = (heat_kernel(&g, s).unwrap(), heat_kernel(&g, t).unwrap(), heat_kernel(&g, s + t).unwrap());
        for x in 0..n {
            for y in 0..n {
                let composed: f64 = (0..n).map(|z| ps.get(x, z) * pt.get(z, y) * g.measure(z)).sum();
                prop_assert!(rel_close(composed, pst.get(x, y), 1e-10));
            }
        }
    }

    #[test]
    fn alpha_is_monotone_in_curvature(k1 in 0.0f64..2.0, dk in 0.0f64..2.0, t in 0.05f64..2.0, which in 0usize..3) {
        let p = match which {
            0 => RateProfile::power(2.0).unwrap(),
            1 => RateProfile::power(1.5).unwrap(),
            _ => RateProfile::sinh_sq(),
        };
        let a = p.alpha_phi(k1, 4.0, t).unwrap();
        let b = p.alpha_phi(k1 + dk, 4.0, t).unwrap();
        prop_assert!(a.alpha >= 1.0 - 1e-12 && a.phi > 0.0);
        prop_assert!(b.alpha >= a.alpha - 1e-12 * b.alpha);
        prop_assert!(b.phi >= a.phi - 1e-12 * b.phi);
    }

    #[test]
    fn report_slack_is_rhs_minus_lhs(rows in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..20)) {
        let mut r = InequalityReport::new("test");
        for (i, &(lhs, rhs)) in rows.iter().enumerate() {
            r.push(i, 1.0, lhs, rhs);
        }
        for row in &r.rows {
            prop_assert_eq!(row.slack, row.rhs - row.lhs);
        }
        prop_assert_eq!(r.min_slack().is_none(), rows.is_empty());
    }

    #[test]
    fn rho_properties(g in graph(), a in 0.2f64..3.0, b in 0.0f64..2.0, t1 in 0.1f64..2.0, dt in 0.1f64..3.0) {
        let n = g.vertex_count();
        let alpha = Alpha::Affine { a, b };
        for y in 0..n {
            let r = rho_compute(&g, 0, y, t1, t1 + dt, &alpha, None).unwrap();
            prop_assert!(r.k_star >= g.distance(0, y).unwrap());
            prop_assert!(r.costs.windows(2).all(|w| w[1].1 >= w[0].1));
            prop_assert_eq!(r.costs.iter().find(|c| c.0 == r.k_star).unwrap().1, r.rho);
            let c = Alpha::Const(a);
            let fwd = rho_compute(&g, 0, y, t1, t1 + dt, &c, None).unwrap().rho;
            let back = rho_compute(&g, y, 0, t1, t1 + dt, &c, None).unwrap().rho;
            prop_assert_eq!(fwd, back);
        }
    }

    #[test]
    fn lemma_bound_for_polynomials(
        p in prop::collection::vec(-2.0f64..2.0, 3),
        q in prop::collection::vec(0.0f64..1.0, 2),
        a0 in 0.2f64..2.0,
        t1 in 0.05f64..1.0,
        dt in 0.1f64..2.0,
    ) {
        let psi = move |t: f64| p[0] + p[1] * t + p[2] * t * t;
        let alpha = move |t: f64| a0 + q[0] * t + q[1] * t * t;
        let r = lemma51_check(psi, alpha, t1, t1 + dt).unwrap();
        prop_assert!(r.slack >= -1e-8, "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn harnack_log_slack_ignores_scaling(c in 0.01f64..100.0, y in 0usize..25, t1 in 0.3f64..1.5, dt in 0.2f64..1.5) {
        let g = generate(Family::Torus { dim: 2, side: 5 }, Weighting::Unit, MeasureKind::Degree).unwrap();
        let u0: Vec<f64> = (0..25).map(|i| if i == 0 { 1.0 } else { 1e-6 }).collect();
        let cu0: Vec<f64> = u0.iter().map(|v| c * v).collect();
        let p = RateProfile::power(2.0).unwrap();
        let t2 = t1 + dt;
        let a = harnack_check(&evolve(&g, &u0, &[t1, t2]).unwrap(), 0, y, t1, t2, &p, 0.0, 4.0).unwrap();
        let b = harnack_check(&evolve(&g, &cu0, &[t1, t2]).unwrap(), 0, y, t1, t2, &p, 0.0, 4.0).unwrap();
        for (fa, fb) in a.forms.iter().zip(&b.forms) {
            prop_assert!((fa.slack - fb.slack).abs() <= 1e-10 * (1.0 + fa.slack.abs()));
        }
    }

    #[test]
    fn liyau_lhs_ignores_scaling(c in 0.01f64..100.0) {
        let g = generate(Family::Cycle(7), Weighting::Random(1), MeasureKind::Degree).unwrap();
        let u0: Vec<f64> = (0..7).map(|i| 0.2 + i as f64).collect();
        let cu0: Vec<f64> = u0.iter().map(|v| c * v).collect();
        let p = RateProfile::power(2.0).unwrap();
        let a = liyau_global_check(&evolve(&g, &u0, &[0.5, 1.0]).unwrap(), &p, 0.0, 2.0).unwrap();
        let b = liyau_global_check(&evolve(&g, &cu0, &[0.5, 1.0]).unwrap(), &p, 0.0, 2.0).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert!((ra.lhs - rb.lhs).abs() <= 1e-10 * (1.0 + ra.lhs.abs()));
        }
    }
}
