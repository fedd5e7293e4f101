//! Synthetic coincidence counts from a known state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::dataset::{CoincidenceDataset, CountRecord};
use crate::channel::Channel;
use crate::grid::validate_grid;
use crate::polarimetry::{Measurement, TwoPhotonState};
use crate::{Error, Result};

fn check(flux: f64, integration_time: f64) -> Result<()> {
    if !(flux.is_finite() && flux > 0.0) {
        return Err(Error::InvalidInput(format!("pair flux {flux} must be positive")));
    }
    if !(integration_time.is_finite() && integration_time > 0.0) {
        return Err(Error::InvalidInput(format!("integration time {integration_time} must be positive")));
    }
    Ok(())
}

/// Expected counts `flux * t * P_i(B)` without noise.
pub fn expected_counts<C: Channel>(
    state: &TwoPhotonState,
    channel: &C,
    grid: &[f64],
    flux: f64,
    integration_time: f64,
) -> Result<CoincidenceDataset> {
    validate_grid(grid)?;
    check(flux, integration_time)?;
    let m = Measurement::pair(state);
    let records = grid
        .iter()
        .map(|&b| {
            let p = m.probabilities_for(&channel.coefficients(b)?);
            let scale = flux * integration_time;
            Ok(CountRecord {
                field: b,
                integration_time,
                counts: [scale * p[0], scale * p[1], scale * p[2]],
                singles: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut d = CoincidenceDataset::new(records)?;
    d.flux = Some(flux);
    Ok(d)
}

/// Poisson-distributed counts around [`expected_counts`], reproducible for a given seed.
pub fn simulate_counts<C: Channel>(
    state: &TwoPhotonState,
    channel: &C,
    grid: &[f64],
    flux: f64,
    integration_time: f64,
    seed: u64,
) -> Result<CoincidenceDataset> {
    let mut d = expected_counts(state, channel, grid, flux, integration_time)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in &mut d.records {
        for c in &mut r.counts {
            *c = poisson(*c, &mut rng)?;
        }
    }
    Ok(d)
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    if mean <= 0.0 {
        return Ok(0.0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng))
}
