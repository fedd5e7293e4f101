//! Chi-squared state reconstruction over physical density matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::CoincidenceDataset;
use super::model::{
    factor_from_params, hermitian_coordinates, hermitian_from_coordinates, operator_from_params, params_from_factor,
    CountModel, PARAMETERS,
};
use crate::channel::Channel;
use crate::optimize::{levenberg_marquardt, LmOptions};
use crate::polarimetry::{best_noon_phase, state_metrics, Basis, DensityMatrix, StateMetrics, TwoPhotonState};
use crate::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            starts: 8,
            seed: 7,
            max_iterations: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Agreement between restarts that reach the same chi-squared. A large spread
/// of the reported (swap-averaged) states signals directions the data do not fix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identifiability {
    /// Largest `1 - F(rho_k, rho_best)` among restarts with near-optimal chi-squared.
    pub restart_spread: f64,
    pub near_optimal_restarts: usize,
    pub well_determined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiBand {
    /// Tesla.
    pub field: f64,
    pub delta: f64,
    /// Fisher information of the fitted state, 1/T^2.
    pub fisher: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub state: TwoPhotonState,
    /// Fitted pair flux, 1/s.
    pub flux: f64,
    pub chi2: f64,
    /// Per record: `(N_i - lambda_i)/sqrt(max(N_i, 1))` for HH, HV, VV.
    pub residuals: Vec<[f64; 3]>,
    /// NOON phase maximizing the fidelity of the fitted state.
    pub noon_phase: f64,
    pub metrics: StateMetrics,
    pub restarts: Vec<RestartSummary>,
    pub identifiability: Identifiability,
    /// Factor parameters of the optimum.
    pub parameters: Vec<f64>,
    pub fi_band: Option<FiBand>,
}

/// Fringe phase span `2 * unwrapped arg(t-/t+)` covered by the dataset, radians.
pub fn fringe_span<C: Channel>(dataset: &CoincidenceDataset, channel: &C) -> Result<f64> {
    let mut fields: Vec<f64> = dataset.records.iter().map(|r| r.field).collect();
    fields.sort_by(f64::total_cmp);
    let mut phases = Vec::with_capacity(fields.len());
    for b in fields {
        let t = channel.coefficients(b)?;
        phases.push(2.0 * (t.t_minus / t.t_plus).arg());
    }
    let mut unwrapped = vec![phases[0]];
    for w in phases.windows(2) {
        let mut d = w[1] - w[0];
        d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        unwrapped.push(unwrapped.last().unwrap() + d);
    }
    let max = unwrapped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = unwrapped.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

struct ConeFit {
    v: DVector<f64>,
    steps: usize,
    converged: bool,
}

/// Minimizes `q(v) = |y - A v|^2` over positive definite `X(v)` by following
/// the central path of `q - mu log det X` with damped Newton steps, from a
/// positive definite `start` and `mu = mu0` down to an optimality gap
/// `4 mu <= gap`.
fn barrier_polish(a: &DMatrix<f64>, y: &DVector<f64>, start: DVector<f64>, mu0: f64, gap: f64) -> ConeFit {
    let n = a.ncols();
    let basis: Vec<DMatrix<C64>> = (0..n)
        .map(|m| hermitian_from_coordinates(&DVector::from_fn(n, |i, _| if i == m { 1.0 } else { 0.0 })))
        .collect();
    let h = a.tr_mul(a).scale(2.0);
    let log_det = |v: &DVector<f64>| {
        let c = hermitian_from_coordinates(v).cholesky()?;
        Some(2.0 * c.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
    };
    let mut v = start;
    let mut mu = mu0;
    let mut steps = 0;
    loop {
        let objective = |v: &DVector<f64>| log_det(v).map(|ld| (y - a * v).norm_squared() - mu * ld);
        for _ in 0..100 {
            // In the eigenbasis X = U diag(l) U^dagger the barrier Hessian is
            // diagonal, 1/(l_a l_b) per coordinate of U^dagger dX U, so it is
            // formed from the eigenvalues without inverting X.
            let eig = SymmetricEigen::new(hermitian_from_coordinates(&v));
            let l = eig.eigenvalues;
            if l.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return ConeFit { v, steps, converged: false };
            }
            let u = &eig.eigenvectors;
            let q = DMatrix::from_columns(&basis.iter().map(|b| hermitian_coordinates(&(u * b * u.adjoint()))).collect::<Vec<_>>());
            let mut curvature = DVector::zeros(n);
            let mut barrier_grad = DVector::zeros(n);
            for i in 0..4 {
                curvature[i] = 1.0 / (l[i] * l[i]);
                barrier_grad[i] = 1.0 / l[i];
            }
            let mut k = 4;
            for i in 0..4 {
                for j in i + 1..4 {
                    curvature[k] = 1.0 / (l[i] * l[j]);
                    curvature[k + 1] = curvature[k];
                    k += 2;
                }
            }
            let grad = q.tr_mul(&a.tr_mul(&(y - a * &v)).scale(-2.0)) - barrier_grad.scale(mu);
            let d = curvature.map(|c| 1.0 / (mu * c).sqrt());
            let data = q.tr_mul(&h) * &q;
            let scaled = DMatrix::from_fn(n, n, |i, k| d[i] * data[(i, k)] * d[k] + if i == k { 1.0 } else { 0.0 });
            let Some(chol) = scaled.cholesky() else {
                return ConeFit { v, steps, converged: false };
            };
            let step_w = chol.solve(&(-grad.component_mul(&d))).component_mul(&d);
            let decrement = -grad.dot(&step_w);
            let step = &q * step_w;
            if decrement <= 1e-6 * mu {
                break;
            }
            steps += 1;
            let f0 = objective(&v).unwrap_or(f64::INFINITY);
            let mut t = 1.0;
            while !objective(&(&v + &step * t)).is_some_and(|f| f <= f0 - 0.25 * t * decrement) {
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            if t < 1e-12 {
                // No representable decrease left at this rounding level.
                if decrement <= 1e-12 * (1.0 + f0.abs()) {
                    break;
                }
                return ConeFit { v, steps, converged: false };
            }
            v += &step * t;
        }
        if 4.0 * mu <= gap {
            return ConeFit { v, steps, converged: true };
        }
        mu *= 0.1;
    }
}

/// Lower-triangular `L` with real non-negative diagonal and `L L^dagger = x`, for
/// positive semidefinite `x`. Columns whose pivot vanishes are set to zero.
fn semidefinite_factor(x: &DMatrix<C64>) -> DMatrix<C64> {
    let n = x.nrows();
    let tiny = 1e-12 * x.trace().re.abs().max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        let d = x[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if d <= tiny {
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = C64::new(pivot, 0.0);
        for i in j + 1..n {
            let s: C64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = (x[(i, j)] - s) / pivot;
        }
    }
    l
}

/// Minimizes `sum (N - lambda)^2 / max(N, 1)` over states `X = L L^dagger`.
pub fn reconstruct<C: Channel>(
    dataset: &CoincidenceDataset,
    channel: &C,
    opts: &ReconstructOptions,
) -> Result<TomographyResult> {
    dataset.validate()?;
    if dataset.len() < MIN_POINTS {
        return Err(Error::Identifiability(format!(
            "{} field points given, at least {MIN_POINTS} are needed",
            dataset.len()
        )));
    }
    let span = fringe_span(dataset, channel)?;
    if span < std::f64::consts::PI {
        return Err(Error::Identifiability(format!(
            "field points cover a fringe phase of {span:.3} rad, less than half a fringe"
        )));
    }
    if opts.starts == 0 {
        return Err(Error::InvalidInput("at least one reconstruction start is required".into()));
    }
    let model = CountModel::new(dataset, channel)?;
    let lm = LmOptions {
        max_iterations: opts.max_iterations,
        cost_tol: 1e-13,
        abs_tol: 1e-9,
        patience: 25,
        ..Default::default()
    };
    let (a, y) = model.design();
    let runs: Vec<(RestartSummary, Vec<f64>)> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut p: Vec<f64> = (0..PARAMETERS).map(|_| StandardNormal.sample(&mut rng)).collect();
            let scale = model.optimal_scale(&operator_from_params(&p)).sqrt();
            p.iter_mut().for_each(|v| *v *= scale);
            let rep = levenberg_marquardt(|x| model.residuals_and_jacobian(x), &p, &lm);
            // The factor-space descent crawls near rank-deficient optima. chi2 is
            // a convex quadratic in X, so a barrier Newton finish from the
            // descent's end point reaches the optimum at any conditioning.
            let x = operator_from_params(&rep.x);
            let x = x.clone() + DMatrix::identity(4, 4).scale(1e-9 * x.trace().re.abs().max(1.0));
            let fit = barrier_polish(&a, &y, hermitian_coordinates(&x), 1e-2 * (1.0 + rep.cost), 1e-10 * (1.0 + rep.cost));
            let xf = hermitian_from_coordinates(&fit.v);
            let factor = xf.clone().cholesky().map_or_else(|| semidefinite_factor(&xf), |c| c.l());
            let polished = params_from_factor(&factor);
            let (params, converged) = if model.chi2(&polished) <= rep.cost {
                (polished, fit.converged)
            } else {
                (rep.x, rep.converged)
            };
            (
                RestartSummary {
                    chi2: model.chi2(&params),
                    iterations: rep.iterations + fit.steps,
                    converged,
                },
                params,
            )
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (r, _)) in runs.iter().enumerate() {
        if r.converged && r.chi2.is_finite() && best.is_none_or(|b| r.chi2 < runs[b].0.chi2) {
            best = Some(i);
        }
    }
    let Some(bi) = best else {
        return Err(Error::NotConverged("no tomography restart converged".into()));
    };
    let params = runs[bi].1.clone();
    let state = state_from_params(&params)?;
    let chi2 = runs[bi].0.chi2;

    let near = chi2 + 1e-6 * (1.0 + chi2);
    let mut spread: f64 = 0.0;
    let mut near_count = 0;
    for (r, p) in &runs {
        if r.converged && r.chi2 <= near {
            near_count += 1;
            let s = state_from_params(p)?;
            spread = spread.max(1.0 - state.fidelity(&s)?);
        }
    }

    let x = operator_from_params(&params);
    let expected = model.expected(&x);
    let residuals = expected
        .iter()
        .zip(&model.counts)
        .zip(&model.weights)
        .map(|((m, n), w)| [0, 1, 2].map(|i| w[i].sqrt() * (n[i] - m[i])))
        .collect();
    let noon_phase = best_noon_phase(&state);
    Ok(TomographyResult {
        flux: x.trace().re,
        metrics: state_metrics(&state, noon_phase),
        state,
        chi2,
        residuals,
        noon_phase,
        restarts: runs.into_iter().map(|(r, _)| r).collect(),
        identifiability: Identifiability {
            restart_spread: spread,
            near_optimal_restarts: near_count,
            well_determined: spread < 1e-3,
        },
        parameters: params,
        fi_band: None,
    })
}

/// Swap-averaged state `(X + S X S)/Tr X` of the factor parameters.
///
/// Coincidence data cannot distinguish `X` from `S X S` (S exchanges the two
/// photons), so every optimum comes with a family of equally good states
/// differing in singlet-triplet coherences. The average is the member of that
/// family without such coherences; it is positive whenever `X` is.
pub(crate) fn state_from_params(p: &[f64]) -> Result<TwoPhotonState> {
    let l = factor_from_params(p);
    let x = &l * l.adjoint();
    TwoPhotonState::from_density(DensityMatrix::from_positive(&swap_average(&x), Basis::Circ)?)
}

/// `(X + S X S)/2` for the exchange `S` swapping basis indices 1 and 2.
pub fn swap_average(x: &DMatrix<C64>) -> DMatrix<C64> {
    let perm = [0usize, 2, 1, 3];
    DMatrix::from_fn(4, 4, |a, b| 0.5 * (x[(a, b)] + x[(perm[a], perm[b])]))
}
