//! Nelder-Mead downhill simplex with adaptive coefficients.

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    /// Initial simplex edge along each coordinate.
    pub step: f64,
    /// Stop when the spread of simplex values falls below `f_tol * (1 + |f_best|)`.
    pub f_tol: f64,
    /// ... and the simplex diameter below `x_tol`.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Restart the simplex around the incumbent this many times after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            step: 0.1,
            f_tol: 1e-10,
            x_tol: 1e-6,
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`. Non-finite values are treated as `+inf`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadReport {
    let n = x0.len();
    let nf = n as f64;
    // Gao-Han coefficients keep the method effective in higher dimension.
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut best = x0.to_vec();
    let mut best_val = eval(&best, &mut evals);
    let mut converged = false;

    for round in 0..=opts.restarts {
        let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
        for i in 0..n {
            let mut p = best.clone();
            let h = if p[i] != 0.0 { opts.step * p[i].abs().max(1.0) } else { opts.step };
            p[i] += h;
            simplex.push(p);
        }
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        values.push(best_val);
        for p in simplex.iter().skip(1) {
            values.push(eval(p, &mut evals));
        }

        converged = false;
        while evals < opts.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex
                .iter()
                .skip(1)
                .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= opts.f_tol * (1.0 + values[0].abs()) && diameter <= opts.x_tol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / nf)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let x = along(gamma);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(-gamma);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            for i in 1..=n {
                let p: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + delta * (x - b))
                    .collect();
                values[i] = eval(&p, &mut evals);
                simplex[i] = p;
            }
        }

        let (i, v) = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let improved = v < best_val - opts.f_tol * (1.0 + best_val.abs());
        if v <= best_val {
            best = simplex[i].clone();
            best_val = v;
        }
        if round > 0 && !improved && converged {
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
    }

    NelderMeadReport {
        x: best,
        value: best_val,
        evaluations: evals,
        converged,
    }
}
