//! Nelder–Mead simplex minimizer with restarts.

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once the spread of objective values across the simplex, and the
    /// gain from a fresh restart, both fall below this.
    pub ftol: f64,
    pub max_iterations: usize,
    /// Restart budget; each restart rebuilds the simplex around the best
    /// point using the initial step sizes.
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-12,
            max_iterations: 10_000,
            max_restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out first.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` starting from `x0`, with initial simplex vertices at
/// `x0 + steps[i] * e_i`. Non-finite objective values are treated as +inf.
pub fn nelder_mead<F>(f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(x0.len(), steps.len());
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..=opts.max_restarts {
        let (x, fx, used, done) = simplex_search(
            &eval,
            &best_x,
            steps,
            opts,
            opts.max_iterations - iterations,
        );
        iterations += used;
        let gain = best_f - fx;
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if !done {
            converged = false;
            break;
        }
        converged = true;
        if gain.is_nan() || gain <= opts.ftol {
            break;
        }
    }

    Minimum {
        x: best_x,
        value: best_f,
        iterations,
        converged,
    }
}

fn simplex_search<F>(
    f: &F,
    x0: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iter = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if worst - best <= opts.ftol {
            return (simplex[0].0.clone(), best, iter, true);
        }
        if iter >= budget {
            return (simplex[0].0.clone(), best, iter, false);
        }
        iter += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // contraction: outside if the reflection helped at all, else inside
        let (xc, fc) = if fr < simplex[n].1 {
            let x = along(REFLECT * CONTRACT);
            let fx = f(&x);
            (x, fx)
        } else {
            let x = along(-CONTRACT);
            let fx = f(&x);
            (x, fx)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *fx = f(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4, "{:?}", m.x);
        assert!((m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn quadratic_3d() {
        let f =
            |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + (x[2] - 0.5).powi(2);
        let m = nelder_mead(
            f,
            &[0.0, 0.0, 0.0],
            &[1.0, 1.0, 1.0],
            &NelderMeadOptions::default(),
        );
        for (got, want) in m.x.iter().zip([3.0, -1.0, 0.5]) {
            assert!((got - want).abs() < 1e-5);
        }
    }

    #[test]
    fn respects_iteration_budget() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_iterations: 5,
            ..Default::default()
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(!m.converged);
        assert!(m.iterations <= 5);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 0.1).powi(2) + x[1] * x[1]
            }
        };
        let m = nelder_mead(f, &[0.5, 0.5], &[0.4, 0.4], &NelderMeadOptions::default());
        assert!((m.x[0] - 0.1).abs() < 1e-5);
    }
}
