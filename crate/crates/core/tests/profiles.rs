use licurv::profiles::{RateProfile, Sign};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn examples() -> Vec<(RateProfile, f64)> {
    vec![
        (RateProfile::power(2.0).unwrap(), 0.7),
        (RateProfile::power(1.5).unwrap(), 0.0),
        (RateProfile::power(2.8).unwrap(), 1.3),
        (RateProfile::power_cubic(0.0).unwrap(), 0.5),
        (RateProfile::power_cubic(1.5).unwrap(), 0.5),
        (RateProfile::sinh_sq(), 0.8),
        (RateProfile::exp_sq(1.0).unwrap(), 0.6),
        (RateProfile::exp_sq(-0.7).unwrap(), 0.6),
        (RateProfile::exp_beta(2.0, Sign::Minus).unwrap(), 0.3),
        (RateProfile::exp_beta(1.5, Sign::Plus).unwrap(), 0.4),
    ]
}

#[test]
fn closed_forms_match_quadrature_and_display() {
    for (p, k) in examples() {
        let limit = p.domain_limit(k).min(5.0);
        for i in 0..30 {
            let t = 0.05 + (limit * 0.999 - 0.05) * i as f64 / 29.0;
            let closed = p.alpha_phi(k, 3.0, t).unwrap();
            let quad = p.alpha_phi_quadrature(k, 3.0, t).unwrap();
            let shown = p.alpha_phi_display(k, 3.0, t).unwrap().unwrap();
            for (x, y, what) in [
                (closed.alpha, quad.alpha, "alpha quad"),
                (closed.phi, quad.phi, "phi quad"),
                (closed.alpha, shown.alpha, "alpha display"),
                (closed.phi, shown.phi, "phi display"),
            ] {
                assert!(rel(x, y) < 1e-9, "{} K={k} t={t} {what}: {x} vs {y}", p.spec());
            }
        }
    }
}

#[test]
fn ode_system_residuals_are_small() {
    for (p, k) in examples() {
        let limit = p.domain_limit(k).min(5.0);
        for i in 0..20 {
            let t = 0.1 + (0.999 * limit - 0.1) * i as f64 / 19.0;
            let r = p.ode_system_residuals(k, 4.0, t).unwrap();
            assert!(r.max_scaled() <= 1e-6, "{} K={k} t={t}: {r:?}", p.spec());
            assert!(r.r2.abs() <= 1e-10 * r.scale2.max(1.0), "{} t={t}: {r:?}", p.spec());
        }
    }
}

#[test]
fn example_pairs_satisfy_condition_a() {
    let cases = [
        (RateProfile::power(2.0).unwrap(), 0.0),
        (RateProfile::power(2.0).unwrap(), 1.0),
        (RateProfile::power(1.3).unwrap(), 0.4),
        (RateProfile::power(2.9).unwrap(), 2.0),
        (RateProfile::sinh_sq(), 0.5),
        (RateProfile::sinh_sq(), 3.0),
        (RateProfile::exp_beta(2.0, Sign::Minus).unwrap(), 1.0),
        (RateProfile::exp_beta(1.5, Sign::Minus).unwrap(), 0.7),
        (RateProfile::exp_beta(2.0, Sign::Plus).unwrap(), 1.0),
        (RateProfile::exp_beta(1.2, Sign::Plus).unwrap(), 0.3),
    ];
    for (p, k) in cases {
        let report = p.condition_a_check(k, 5.0).unwrap();
        assert!(report.passed, "{} K={k}: {report:?}", p.spec());
        if k > 0.0 {
            let report = p.condition_b_check(k, 5.0).unwrap();
            assert!(report.passed, "{} K={k}: {report:?}", p.spec());
        }
    }
}

#[test]
fn power_beta_matches_its_defining_integral() {
    // β(t) = exp ∫₁ᵗ g(s) ds, integrated here with composite Simpson in log s.
    let (gamma, k) = (2.2, 0.8);
    let p = RateProfile::power(gamma).unwrap();
    let b = 2.0 * k / (1.0 + gamma);
    let g = |s: f64| (gamma + (gamma - 1.0) * b * s).powi(2) / (2.0 * s * (gamma - 1.0) * (1.0 + b * s).powi(2));
    for t in [0.05f64, 0.7, 1.0, 3.0, 12.0] {
        let m = 2000;
        let (u0, u1) = (0f64, t.ln());
        let h = (u1 - u0) / m as f64;
        let mut sum = 0.0;
        for i in 0..=m {
            let u = u0 + h * i as f64;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w * g(u.exp()) * u.exp();
        }
        let expected = (sum * h / 3.0).exp();
        let (beta, dlog) = p.beta(t, k).unwrap();
        assert!(rel(beta, expected) < 1e-10, "t={t}: {beta} vs {expected}");
        assert!(rel(dlog, g(t)) < 1e-13);
    }
}

#[test]
fn power_eta_tilde_is_the_supremum() {
    for (gamma, k) in [(1.5, 0.5), (2.0, 1.0), (2.7, 2.0)] {
        let p = RateProfile::power(gamma).unwrap();
        let big_t = 1e4;
        let eta = p.eta_tilde(big_t, k).unwrap();
        let best = (0..20000)
            .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 20000.0))
            .filter(|&t| t <= big_t)
            .map(|t| p.condition_b_ratio(t, k).unwrap())
            .fold(0.0, f64::max);
        assert!(best <= eta * (1.0 + 1e-12) && best >= eta * (1.0 - 1e-6), "{gamma}: {best} vs {eta}");
    }
}

#[test]
fn sinh_ratio_tends_to_three_halves() {
    let p = RateProfile::sinh_sq();
    let r = p.condition_b_ratio(1e-5, 1.0).unwrap();
    assert!((r - 1.5).abs() < 1e-8, "{r}");
    assert!(p.condition_b_ratio(3.0, 1.0).unwrap() < 1.5);
}

#[test]
fn exponential_beta_above_the_bound_fails() {
    use licurv::profiles::BetaChoice;
    use std::sync::Arc;
    let p = RateProfile::power(2.0).unwrap();
    let grid_max = (0..400)
        .map(|i| 5.0 * 10f64.powf(-4.0 + 4.0 * i as f64 / 399.0))
        .map(|t| p.condition_a_rhs(t, 0.0).unwrap())
        .fold(0.0, f64::max);
    let m = 2.0 * grid_max;
    let p = p.with_beta(BetaChoice::Custom(Arc::new(move |t| ((m * t).exp(), m))));
    let report = p.condition_a_check(0.0, 5.0).unwrap();
    assert!(!report.passed);
    assert!(report.worst_t > 0.0 && report.worst_t <= 5.0);
}

#[test]
fn assumptions_hold_for_examples() {
    for (p, k) in examples() {
        let report = p.validate(k, 5.0).unwrap();
        assert!(report.a1 && report.a2, "{}: {report:?}", p.spec());
    }
    let flat = RateProfile::custom("flat", |t| 1.0 + t, |_| 1.0);
    let report = flat.validate(0.0, 1.0).unwrap();
    assert!(!report.a1);
}

#[test]
fn zero_curvature_collapses_alpha() {
    for (p, _) in examples().into_iter().filter(|(p, _)| p.alpha_phi(0.0, 2.0, 1.0).is_ok()) {
        for t in [0.1, 1.0, 3.0] {
            let ap = p.alpha_phi(0.0, 2.0, t).unwrap();
            assert_eq!(ap.alpha, 1.0);
        }
    }
}

#[test]
fn custom_profile_uses_quadrature() {
    let custom = RateProfile::custom("t^2", |t| t * t, |t| 2.0 * t);
    let power = RateProfile::power(2.0).unwrap();
    for t in [0.1, 1.0, 4.0] {
        let a = custom.alpha_phi(0.5, 3.0, t).unwrap();
        let b = power.alpha_phi(0.5, 3.0, t).unwrap();
        assert!(rel(a.alpha, b.alpha) < 1e-10 && rel(a.phi, b.phi) < 1e-10);
    }
}
