//! Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Converged once the spread of simplex values is below `f_tol·(1+|best|)`
    /// and the simplex diameter (max-norm) is below `x_tol`.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { f_tol: 1e-12, x_tol: 1e-8, max_evals: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, opts: NelderMeadOptions) -> Minimum {
    let dim = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        let value = eval(x0);
        return Minimum { x: Vec::new(), value, evals: 1, converged: true };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals.get() < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.f_tol * (1.0 + best.abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let reflected = toward(alpha, &simplex[dim].0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = toward(gamma, &simplex[dim].0);
            let fe = eval(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[dim].1 {
            let c = toward(rho, &simplex[dim].0);
            let v = eval(&c);
            (c, v)
        } else {
            let c = toward(-rho, &simplex[dim].0);
            let v = eval(&c);
            (c, v)
        };
        if fc < fr.min(simplex[dim].1) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best.iter().zip(&entry.0).map(|(b, x)| b + sigma * (x - b)).collect();
            let v = eval(&x);
            *entry = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals: evals.get(), converged }
}
