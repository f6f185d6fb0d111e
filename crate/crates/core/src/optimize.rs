//! Derivative-free Nelder–Mead minimizer with dimension-adaptive
//! coefficients (Gao & Han), used by the tomography fit.

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Stop once the best value improved by less than `stall_tolerance`
    /// over this many iterations.
    pub stall_iterations: usize,
    pub stall_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            stall_iterations: 50,
            stall_tolerance: 1e-12,
            max_evaluations: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// `false` when the evaluation budget ran out first.
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` from an axis-aligned simplex around `x0` with edge `step`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], step: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert_eq!(step.len(), n);
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = if n >= 2 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };

        let mut evaluations = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = eval(x0, &mut evaluations);
        simplex.push((x0.to_vec(), f0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
            let v = eval(&x, &mut evaluations);
            simplex.push((x, v));
        }

        let mut history: Vec<f64> = Vec::new();
        let mut iterations = 0usize;
        let mut converged = false;
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];

        while evaluations < self.max_evaluations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            history.push(best);
            if history.len() > self.stall_iterations {
                let past = history[history.len() - 1 - self.stall_iterations];
                if past - best < self.stall_tolerance {
                    converged = true;
                    break;
                }
            }
            if best == 0.0 {
                converged = true;
                break;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let worst = simplex[n].clone();
            let second_worst = simplex[n - 1].1;

            let along = |t: f64, out: &mut Vec<f64>| {
                for i in 0..n {
                    out[i] = centroid[i] + t * (worst.0[i] - centroid[i]);
                }
            };

            along(-alpha, &mut trial);
            let fr = eval(&trial, &mut evaluations);
            if fr < best {
                let reflected = trial.clone();
                along(-alpha * gamma, &mut trial);
                let fe = eval(&trial, &mut evaluations);
                simplex[n] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
                continue;
            }
            if fr < second_worst {
                simplex[n] = (trial.clone(), fr);
                continue;
            }
            let (t, bound) = if fr < worst.1 { (-alpha * rho, fr) } else { (rho, worst.1) };
            along(t, &mut trial);
            let fc = eval(&trial, &mut evaluations);
            if fc < bound {
                simplex[n] = (trial.clone(), fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, ai) in x.iter_mut().zip(&anchor) {
                    *xi = ai + sigma * (*xi - ai);
                }
                *v = eval(x, &mut evaluations);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evaluations,
            iterations,
            converged,
        }
    }
}
