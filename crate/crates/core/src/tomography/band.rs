//! Ranges of a derived quantity over the region `chi2 <= chi2_min + delta`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::dataset::CoincidenceDataset;
use super::model::CountModel;
use super::reconstruct::{state_from_params, FiBand, TomographyResult};
use crate::channel::Channel;
use crate::metrology::{PairProbe, DEFAULT_STEP};
use crate::optimize::{bfgs, central_gradient, BfgsOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandOptions {
    /// Multiplier updates used to place the extreme point on the boundary.
    pub bisection_steps: usize,
    /// Quasi-Newton iterations per inner minimization.
    pub max_iterations: usize,
    /// Accepted boundary mismatch `|chi2 - chi2_min - delta|`, relative to `delta`.
    pub tolerance: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            bisection_steps: 40,
            max_iterations: 300,
            tolerance: 1e-3,
        }
    }
}

/// Smallest and largest `quantity` over `chi2(x) <= chi2(x0) + delta`.
///
/// Each extreme is traced by minimizing `chi2 - nu * quantity` (or `+`) and
/// adjusting the multiplier `nu` until the minimizer sits on the boundary.
/// Coordinates are searched in units of `scales`. Infeasible candidates are
/// pulled back toward `x0` by bisection, so the returned interval always
/// contains `quantity(x0)` and every endpoint is attained by a feasible point.
pub fn profile_band<X, Q>(chi2: X, quantity: Q, x0: &[f64], scales: &[f64], delta: f64, opts: &BandOptions) -> Result<(f64, f64)>
where
    X: Fn(&[f64]) -> f64,
    Q: Fn(&[f64]) -> f64,
{
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidInput(format!("band threshold {delta} must be non-negative")));
    }
    if scales.len() != x0.len() || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidInput("band search scales must be positive, one per parameter".into()));
    }
    let c0 = chi2(x0);
    let q0 = quantity(x0);
    if !(c0.is_finite() && q0.is_finite()) {
        return Err(Error::NonFinite("band reference point".into()));
    }
    if delta == 0.0 {
        return Ok((q0, q0));
    }
    let limit = c0 + delta;
    let qscale = q0.abs().max(f64::MIN_POSITIVE);
    let n = x0.len();
    let to_x = |z: &[f64]| -> Vec<f64> { x0.iter().zip(scales).zip(z).map(|((x, s), z)| x + s * z).collect() };
    let chi2_z = |z: &[f64]| chi2(&to_x(z));
    let q_z = |z: &[f64]| quantity(&to_x(z)) / qscale;

    let linear = linearized_extremes(&chi2_z, &q_z, n, delta);
    // Fixed offset of a tenth of a scale unit so the inner searches can leave
    // rank-deficient factors, where the first-order change of chi2 vanishes.
    let nudge: Vec<f64> = (0..n).map(|k| 0.1 * (((k as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5)).collect();
    let inner = BfgsOptions {
        max_iterations: opts.max_iterations,
        grad_tol: 1e-10,
        f_tol: 1e-13,
    };

    let mut out = [q0, q0];
    for (slot, sign) in [(0usize, -1.0), (1usize, 1.0)] {
        let mut keep = |z: &[f64], c: f64| {
            let x = if c <= limit { to_x(z) } else { feasible_point(&chi2, x0, &to_x(z), limit) };
            let q = quantity(&x);
            if q.is_finite() {
                out[slot] = if sign < 0.0 { out[slot].min(q) } else { out[slot].max(q) };
            }
        };
        let solve = |nu: f64, from: &[f64]| -> Vec<f64> {
            let objective = |z: &[f64]| chi2_z(z) - c0 - nu * sign * q_z(z);
            let start: Vec<f64> = from.iter().zip(&nudge).map(|(a, b)| a + b).collect();
            bfgs(|z| (objective(z), central_gradient(objective, z, 1e-4)), &start, &inner).x
        };

        let (mut nu_hi, mut z_lo) = match &linear {
            Some((nu, ends)) => {
                keep(&ends[slot], chi2_z(&ends[slot]));
                (*nu, vec![0.0; n])
            }
            None => (1.0, vec![0.0; n]),
        };
        let mut nu_lo = 0.0;
        let mut bracketed = false;
        for _ in 0..40 {
            let z = solve(nu_hi, &z_lo);
            let c = chi2_z(&z);
            keep(&z, c);
            if !c.is_finite() || c > limit {
                bracketed = true;
                break;
            }
            nu_lo = nu_hi;
            z_lo = z;
            nu_hi *= 4.0;
        }
        if !bracketed {
            continue;
        }
        for _ in 0..opts.bisection_steps {
            let nu = if nu_lo > 0.0 { (nu_lo * nu_hi).sqrt() } else { 0.5 * nu_hi };
            let z = solve(nu, &z_lo);
            let c = chi2_z(&z);
            keep(&z, c);
            if (c - limit).abs() <= opts.tolerance * delta {
                break;
            }
            if c.is_finite() && c < limit {
                nu_lo = nu;
                z_lo = z;
            } else {
                nu_hi = nu;
            }
        }
    }
    Ok((out[0], out[1]))
}

/// Extremes of the quadratic model of `chi2` and the linear model of `quantity`
/// at the origin: `-/+ nu H+ g` with `nu = sqrt(2 delta / g'H+g)`. `None` when
/// the quantity has no first-order variation along curved directions.
fn linearized_extremes<X, Q>(chi2: &X, quantity: &Q, n: usize, delta: f64) -> Option<(f64, [Vec<f64>; 2])>
where
    X: Fn(&[f64]) -> f64,
    Q: Fn(&[f64]) -> f64,
{
    let h = 1e-3;
    let at = |steps: &[(usize, f64)]| -> Vec<f64> {
        let mut z = vec![0.0; n];
        for &(k, d) in steps {
            z[k] += d * h;
        }
        z
    };
    let c0 = chi2(&vec![0.0; n]);
    let mut hess = DMatrix::<f64>::zeros(n, n);
    let mut grad = DVector::<f64>::zeros(n);
    for a in 0..n {
        grad[a] = (quantity(&at(&[(a, 1.0)])) - quantity(&at(&[(a, -1.0)]))) / (2.0 * h);
        hess[(a, a)] = (chi2(&at(&[(a, 1.0)])) - 2.0 * c0 + chi2(&at(&[(a, -1.0)]))) / (h * h);
        for b in 0..a {
            let v = (chi2(&at(&[(a, 1.0), (b, 1.0)])) - chi2(&at(&[(a, 1.0), (b, -1.0)]))
                - chi2(&at(&[(a, -1.0), (b, 1.0)]))
                + chi2(&at(&[(a, -1.0), (b, -1.0)])))
                / (4.0 * h * h);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    if !(hess.iter().all(|v| v.is_finite()) && grad.iter().all(|v| v.is_finite())) {
        return None;
    }
    let eig = SymmetricEigen::new(hess);
    let top = eig.eigenvalues.amax();
    let mut dir = DVector::<f64>::zeros(n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam > 1e-10 * top {
            let v = eig.eigenvectors.column(k);
            dir += v * (v.dot(&grad) / lam);
        }
    }
    let curvature = grad.dot(&dir);
    if curvature.is_nan() || curvature <= 0.0 {
        return None;
    }
    let nu = (2.0 * delta / curvature).sqrt();
    let up = dir * nu;
    Some((nu, [(-&up).as_slice().to_vec(), up.as_slice().to_vec()]))
}

/// Furthest point on the segment `from -> to` that satisfies `chi2 <= limit`.
fn feasible_point<X: Fn(&[f64]) -> f64>(chi2: &X, from: &[f64], to: &[f64], limit: f64) -> Vec<f64> {
    let at = |t: f64| -> Vec<f64> { from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect() };
    if chi2(to) <= limit {
        return to.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chi2(&at(mid)) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Band of pair Fisher information at `field` over states within `delta` of the best chi-squared.
pub fn fi_error_band<C: Channel>(
    result: &TomographyResult,
    dataset: &CoincidenceDataset,
    channel: &C,
    field: f64,
    delta: f64,
    opts: &BandOptions,
) -> Result<FiBand> {
    let model = CountModel::new(dataset, channel)?;
    let probe = PairProbe::new(channel, field, DEFAULT_STEP, false)?;
    let fisher = |p: &[f64]| state_from_params(p).map(|s| probe.fisher(&s).total).unwrap_or(f64::NAN);
    let x0 = &result.parameters;
    let (_, jac) = model.residuals_and_jacobian(x0);
    let jtj = jac.transpose() * &jac;
    // Unit chi-squared curvature per coordinate; coordinates the data do not
    // constrain at first order (zero columns of the factor) get the typical scale.
    let curved: Vec<f64> = (0..x0.len()).map(|k| jtj[(k, k)]).filter(|c| *c > 0.0).map(|c| 1.0 / c.sqrt()).collect();
    let typical = if curved.is_empty() {
        1.0
    } else {
        let mut sorted = curved.clone();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 2]
    };
    let scales: Vec<f64> = (0..x0.len())
        .map(|k| {
            let c = jtj[(k, k)];
            if c > 0.0 {
                1.0 / c.sqrt()
            } else {
                typical
            }
        })
        .collect();
    let (min, max) = profile_band(|p| model.chi2(p), fisher, x0, &scales, delta, opts)?;
    Ok(FiBand {
        field,
        delta,
        fisher: fisher(x0),
        min,
        max,
    })
}
