//! Classical Fisher information of detection outcomes with respect to the field.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default finite-difference step, tesla.
pub const DEFAULT_STEP: f64 = 10e-6;
/// Outcomes less likely than this contribute nothing.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Fisher information at one field value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherPoint {
    pub field: f64,
    pub probabilities: Vec<f64>,
    /// dP_i/dB, 1/T.
    pub derivatives: Vec<f64>,
    /// (dP_i/dB)^2 / P_i, 1/T^2.
    pub contributions: Vec<f64>,
    pub total: f64,
}

/// Field values at which [`fisher_from_stencil`] expects probabilities: `[B, B-2h, B-h, B+h, B+2h]`.
pub fn stencil_fields(field: f64, step: f64) -> [f64; 5] {
    [field, field - 2.0 * step, field - step, field + step, field + 2.0 * step]
}

/// `sum_i P_i (d ln P_i / dB)^2` with derivatives from a fourth-order central difference.
pub fn fisher_information<F>(probabilities: F, field: f64, step: f64) -> Result<FisherPoint>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput(format!("derivative step {step} must be positive")));
    }
    let samples = stencil_fields(field, step)
        .iter()
        .map(|&b| probabilities(b))
        .collect::<Result<Vec<_>>>()?;
    fisher_from_stencil(field, step, &samples)
}

/// Fisher information from probabilities sampled at [`stencil_fields`].
pub fn fisher_from_stencil(field: f64, step: f64, samples: &[Vec<f64>]) -> Result<FisherPoint> {
    if samples.len() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            found: samples.len(),
        });
    }
    let k = samples[0].len();
    if samples.iter().any(|s| s.len() != k) {
        return Err(Error::InvalidInput("outcome count changes across the stencil".into()));
    }
    if samples.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite(format!("outcome probability near B = {field} T")));
    }
    // Fourth-order central difference, written as paired differences so a flat signal gives exactly 0.
    let derivatives: Vec<f64> = (0..k)
        .map(|i| (8.0 * (samples[3][i] - samples[2][i]) - (samples[4][i] - samples[1][i])) / (12.0 * step))
        .collect();
    Ok(fisher_from_derivatives(field, samples[0].clone(), derivatives))
}

/// Assembles a [`FisherPoint`] from probabilities and their field derivatives.
pub fn fisher_from_derivatives(field: f64, probabilities: Vec<f64>, derivatives: Vec<f64>) -> FisherPoint {
    let contributions: Vec<f64> = probabilities
        .iter()
        .zip(&derivatives)
        .map(|(&p, &d)| if p < PROBABILITY_FLOOR { 0.0 } else { d * d / p })
        .collect();
    let total = contributions.iter().sum();
    FisherPoint {
        field,
        probabilities,
        derivatives,
        contributions,
        total,
    }
}

/// Appends the no-detection probability `1 - sum P_i`.
pub fn with_no_click(mut p: Vec<f64>) -> Vec<f64> {
    let rest = 1.0 - p.iter().sum::<f64>();
    p.push(rest.max(0.0));
    p
}

/// Field uncertainty `(I M)^(-1/2)` after `m` repetitions.
pub fn magnetic_uncertainty(fisher: f64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("repetition count must be at least 1".into()));
    }
    if !(fisher.is_finite() && fisher >= 0.0) {
        return Err(Error::InvalidInput(format!("Fisher information {fisher} must be non-negative")));
    }
    if fisher == 0.0 {
        return Err(Error::Undefined("field uncertainty with zero Fisher information".into()));
    }
    Ok(1.0 / (fisher * m as f64).sqrt())
}
