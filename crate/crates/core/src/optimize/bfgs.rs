//! BFGS quasi-Newton minimization with a weak Wolfe line search.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop when the gradient infinity-norm falls below `grad_tol * (1 + |f|)`.
    pub grad_tol: f64,
    /// ... or when an accepted step lowers `f` by less than `f_tol * (1 + |f|)`.
    pub f_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 500,
            grad_tol: 1e-9,
            f_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient with step `h` in every coordinate.
pub fn central_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + h;
            let up = f(&p);
            p[k] = x[k] - h;
            let down = f(&p);
            p[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Minimizes `f`; `model` returns the value and gradient at a point.
pub fn bfgs<F>(mut model: F, x0: &[f64], opts: &BfgsOptions) -> BfgsReport
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut f, g) = model(x.as_slice());
    let mut g = DVector::from_vec(g);
    let mut inv = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    let mut iterations = 0;
    if !(f.is_finite() && g.iter().all(|v| v.is_finite())) {
        return BfgsReport {
            x: x0.to_vec(),
            value: f,
            iterations,
            converged,
        };
    }
    let mut scaled = false;
    while iterations < opts.max_iterations {
        if g.amax() <= opts.grad_tol * (1.0 + f.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut d = -(&inv * &g);
        let mut slope = d.dot(&g);
        if slope >= 0.0 {
            inv = DMatrix::identity(n, n);
            d = -g.clone();
            slope = d.dot(&g);
        }
        // Lewis-Overton bracketing for the weak Wolfe conditions.
        let (c1, c2) = (1e-4, 0.9);
        let (mut lo, mut hi, mut t) = (0.0, f64::INFINITY, 1.0);
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &d * t;
            let (ft, gt) = model(trial.as_slice());
            let gt = DVector::from_vec(gt);
            if !ft.is_finite() || ft > f + c1 * t * slope {
                hi = t;
            } else if gt.dot(&d) < c2 * slope {
                lo = t;
                accepted = Some((trial, ft, gt));
            } else {
                accepted = Some((trial, ft, gt));
                break;
            }
            t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(0.5) };
        }
        let Some((xn, fnew, gn)) = accepted else {
            converged = true;
            break;
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        let decrease = f - fnew;
        x = xn;
        f = fnew;
        g = gn;
        if sy > 1e-300 {
            if !scaled {
                inv *= sy / y.norm_squared();
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &inv * &y;
            let yhy = y.dot(&hy);
            inv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if decrease <= opts.f_tol * (1.0 + f.abs()) {
            converged = true;
            break;
        }
    }
    BfgsReport {
        x: x.as_slice().to_vec(),
        value: f,
        iterations,
        converged,
    }
}
