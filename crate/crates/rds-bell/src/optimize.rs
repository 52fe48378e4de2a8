//! A small derivative-free simplex minimizer used by the settings search.

/// Knobs for one Nelder-Mead run.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Converged when both the simplex diameter and the function spread
    /// fall below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.4,
            tol: 1e-9,
            max_iter: 4000,
        }
    }
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Minimizes f starting from x0 with the standard Nelder-Mead moves.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += opts.initial_step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = simplex[n].1 - simplex[0].1;
        if diameter < opts.tol && spread.abs() < opts.tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point = |scale: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + scale * (c - w))
                .collect()
        };

        let reflected = point(ALPHA);
        let f_reflected = f(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = point(GAMMA);
            let f_expanded = f(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < worst.1 {
                point(RHO)
            } else {
                point(-RHO)
            };
            let f_contracted = f(&contracted);
            if f_contracted < worst.1.min(f_reflected) {
                simplex[n] = (contracted, f_contracted);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(x, b)| b + SIGMA * (x - b))
                        .collect();
                    let fx = f(&x);
                    *entry = (x, fx);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        fx,
        iterations,
        converged,
    }
}
