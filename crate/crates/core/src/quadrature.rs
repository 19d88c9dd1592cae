//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` to about `tol` absolute error.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let value = refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature { a, b })
    }
}

/// `∫_0^t f` after the substitution `s = t·u^p`, which absorbs an endpoint
/// singularity `s^{-q}` at zero whenever `p(1 − q) ≥ 1`. The transformed
/// integrand is bounded, and `u` below `1e-12` is evaluated at `1e-12` so `f` never sees `s = 0`.
pub fn integrate_from_zero(f: impl Fn(f64) -> f64, t: f64, power: f64, rel_tol: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = power.max(1.0);
    let g = |u: f64| {
        let u = u.max(1e-12);
        let s = t * u.powf(p);
        f(s) * p * t * u.powf(p - 1.0)
    };
    // Two passes: the first fixes the scale for a relative tolerance.
    let rough = adaptive_simpson(g, 0.0, 1.0, 1e-6 * t.abs().max(1e-300))?;
    let tol = (rel_tol * rough.abs()).max(1e-300);
    adaptive_simpson(g, 0.0, 1.0, tol)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| x.powi(4), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn smooth_functions() {
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity_with_substitution() {
        // ∫_0^2 s^{-1/2} ds = 2√2.
        let v = integrate_from_zero(|s| s.powf(-0.5), 2.0, 2.0, 1e-13).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-11, "{v}");
        // ∫_0^1 s^{-0.8} ds = 5 with p = 5.
        let v = integrate_from_zero(|s| s.powf(-0.8), 1.0, 5.0, 1e-13).unwrap();
        assert!((v - 5.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn nan_integrand_is_an_error() {
        assert!(adaptive_simpson(|_| f64::NAN, 0.0, 1.0, 1e-8).is_err());
    }
}
