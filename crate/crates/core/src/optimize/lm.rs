//! Levenberg-Marquardt for nonlinear least squares with a user Jacobian.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// The fit counts as converged once the cost has dropped by no more than
    /// `cost_tol * cost + abs_tol` over the last `patience` accepted steps.
    pub cost_tol: f64,
    pub abs_tol: f64,
    pub patience: usize,
    /// Gradient infinity-norm threshold, relative to `1 + cost`.
    pub grad_tol: f64,
    pub initial_damping: f64,
    /// Lower bound on each diagonal damping entry, relative to the largest.
    pub damping_floor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            cost_tol: 1e-14,
            abs_tol: 0.0,
            patience: 1,
            grad_tol: 1e-12,
            initial_damping: 1e-3,
            damping_floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `sum r_i(x)^2`. `model` returns residuals and the Jacobian
/// `d r_i / d x_j` (rows = residuals).
pub fn levenberg_marquardt<F>(mut model: F, x0: &[f64], opts: &LmOptions) -> LmReport
where
    F: FnMut(&[f64]) -> (Vec<f64>, DMatrix<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (r, mut jac) = model(x.as_slice());
    let mut res = DVector::from_vec(r);
    let mut cost = res.norm_squared();
    let mut lambda = opts.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    if !cost.is_finite() {
        return LmReport {
            x: x0.to_vec(),
            cost,
            iterations,
            converged,
        };
    }

    let mut nu = 2.0;
    let mut history: std::collections::VecDeque<f64> = std::collections::VecDeque::from([cost]);
    let patience = opts.patience.max(1);
    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &res;
        if g.amax() <= opts.grad_tol * (1.0 + cost) {
            converged = true;
            break;
        }
        let max_diag = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(opts.damping_floor * max_diag);
            }
            let Some(ch) = a.cholesky() else {
                lambda *= nu;
                nu *= 2.0;
                continue;
            };
            let step = ch.solve(&(-&g));
            let trial = &x + &step;
            let (r, j) = model(trial.as_slice());
            let trial_res = DVector::from_vec(r);
            let trial_cost = trial_res.norm_squared();
            // Decrease predicted by the damped quadratic model.
            let predicted = -(step.dot(&g) * 2.0 + step.dot(&(&jtj * &step)));
            if trial_cost.is_finite() && trial_cost < cost {
                let rho = if predicted > 0.0 { (cost - trial_cost) / predicted } else { 1.0 };
                x = trial;
                res = trial_res;
                jac = j;
                cost = trial_cost;
                lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                lambda = lambda.max(1e-18);
                nu = 2.0;
                accepted = true;
                history.push_back(cost);
                if history.len() > patience + 1 {
                    history.pop_front();
                }
                if history.len() == patience + 1 {
                    let decrease = history[0] - cost;
                    if decrease <= opts.cost_tol * history[0] + opts.abs_tol {
                        converged = true;
                    }
                }
                break;
            }
            lambda *= nu;
            nu *= 2.0;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point to working precision.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    LmReport {
        x: x.as_slice().to_vec(),
        cost,
        iterations,
        converged,
    }
}
