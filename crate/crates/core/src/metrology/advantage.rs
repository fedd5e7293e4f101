//! NOON-state Fisher information and its advantage over the single-photon limit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::efficiency::EfficiencyModel;
use super::fisher::{fisher_from_stencil, stencil_fields, with_no_click, FisherPoint, DEFAULT_STEP};
use super::scattering::ScatteringOperator;
use super::sql::{sql_optimize, SqlObjective, SqlOptions, SqlResult};
use crate::atomic::CellConfig;
use crate::channel::{Channel, VaporChannel};
use crate::constants::Isotope;
use crate::optimize::refine_extremum;
use crate::polarimetry::{make_noon_state, Measurement, TransferOperator, TwoPhotonState};
use crate::{Error, Result};

/// Pair probe at one field with cell coefficients cached on the stencil.
#[derive(Clone, Debug)]
pub struct PairProbe {
    field: f64,
    step: f64,
    include_no_click: bool,
    coefficients: [(C64, C64); 5],
    scattering: ScatteringOperator,
}

impl PairProbe {
    pub fn new<C: Channel>(channel: &C, field: f64, step: f64, include_no_click: bool) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!("derivative step {step} must be positive")));
        }
        let ts = stencil_fields(field, step)
            .iter()
            .map(|&b| channel.coefficients(b))
            .collect::<Result<Vec<_>>>()?;
        let mut coefficients = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); 5];
        for (slot, t) in coefficients.iter_mut().zip(&ts) {
            *slot = (t.t_plus, t.t_minus);
        }
        Ok(PairProbe {
            field,
            step,
            include_no_click,
            coefficients,
            scattering: ScatteringOperator::from_coefficients(&ts[0]),
        })
    }

    pub fn fisher(&self, state: &TwoPhotonState) -> FisherPoint {
        let m = Measurement::pair(state);
        let samples: Vec<Vec<f64>> = self
            .coefficients
            .iter()
            .map(|&(p, q)| {
                let probs = m.probabilities(&TransferOperator::pair(p, q)).expect("4x4");
                if self.include_no_click {
                    with_no_click(probs)
                } else {
                    probs
                }
            })
            .collect();
        fisher_from_stencil(self.field, self.step, &samples).expect("five finite samples")
    }

    pub fn scattering(&self, state: &TwoPhotonState) -> f64 {
        Measurement::pair(state).diagonal_expectation(&self.scattering.pair())
    }
}

/// NOON phase in `[0, pi)` maximizing the pair Fisher information at `field`
/// for the mixture with weight `p` (coarse scan, then golden-section refinement).
pub fn optimize_noon_phase<C: Channel>(channel: &C, field: f64, p: f64, step: f64, include_no_click: bool) -> Result<f64> {
    use std::f64::consts::PI;
    let probe = PairProbe::new(channel, field, step, include_no_click)?;
    let fi = |phi: f64| make_noon_state(phi, p).map(|s| probe.fisher(&s).total).unwrap_or(f64::NAN);
    let n = 64;
    let h = PI / n as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = fi(i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if !best.is_finite() {
        return Err(Error::NonFinite("NOON Fisher information".into()));
    }
    let c = best_i as f64 * h;
    let (phi, _) = refine_extremum(fi, c - h, c + h, true, 1e-10);
    Ok(phi.rem_euclid(PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageOptions {
    pub step: f64,
    pub include_no_click: bool,
    pub sql: SqlOptions,
    pub efficiency: EfficiencyModel,
}

impl Default for AdvantageOptions {
    fn default() -> Self {
        AdvantageOptions {
            step: DEFAULT_STEP,
            include_no_click: false,
            sql: SqlOptions::default(),
            efficiency: EfficiencyModel::default(),
        }
    }
}

/// NOON versus optimized single photons through one channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelAdvantage {
    pub field: f64,
    /// Pair Fisher information, 1/T^2.
    pub noon_fisher: f64,
    /// Mean scattered photons per pair.
    pub noon_scattering: f64,
    pub sql_per_photon: SqlResult,
    /// Absent when the channel does not scatter.
    pub sql_per_scatter: Option<SqlResult>,
    /// `I_NOON / (2 I_SQL)`.
    pub per_photon: f64,
    /// `(I/S)_NOON / (I/S)_SQL`.
    pub per_scatter: Option<f64>,
}

pub fn advantage_on_channel<C: Channel>(
    state: &TwoPhotonState,
    channel: &C,
    field: f64,
    opts: &AdvantageOptions,
) -> Result<ChannelAdvantage> {
    let sql_opts = SqlOptions {
        step: opts.step,
        include_no_click: opts.include_no_click,
        ..opts.sql
    };
    let probe = PairProbe::new(channel, field, opts.step, opts.include_no_click)?;
    let noon_fisher = probe.fisher(state).total;
    let noon_scattering = probe.scattering(state);
    let sql_per_photon = sql_optimize(channel, field, SqlObjective::PerPhoton, &sql_opts)?;
    if sql_per_photon.fisher <= 0.0 {
        return Err(Error::Undefined(format!("single-photon Fisher information vanishes at B = {field} T")));
    }
    let sql_per_scatter = if noon_scattering > 0.0 {
        match sql_optimize(channel, field, SqlObjective::PerScatter, &sql_opts) {
            Ok(r) => Some(r),
            Err(Error::Undefined(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let per_scatter = sql_per_scatter
        .as_ref()
        .and_then(|r| r.fisher_per_scatter)
        .map(|sql| noon_fisher / noon_scattering / sql);
    Ok(ChannelAdvantage {
        field,
        noon_fisher,
        noon_scattering,
        per_photon: noon_fisher / (2.0 * sql_per_photon.fisher),
        sql_per_photon,
        sql_per_scatter,
        per_scatter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRatios {
    pub field: f64,
    pub efficiency: EfficiencyModel,
    pub full: ChannelAdvantage,
    /// Same cell with the Rb-87 fraction removed.
    pub pure85: ChannelAdvantage,
    pub per_photon_ratio: f64,
    pub per_scatter_ratio: Option<f64>,
    pub per_scatter_ratio_pure85: Option<f64>,
    pub per_photon_adjusted: f64,
    pub per_scatter_adjusted: Option<f64>,
    pub per_scatter_pure85_adjusted: Option<f64>,
}

/// Advantage ratios of `state` in the modeled cell at `field`, with and without Rb-87.
pub fn advantage_ratios(
    field: f64,
    cell: &CellConfig,
    probe_frequency: f64,
    lossless: bool,
    state: &TwoPhotonState,
    opts: &AdvantageOptions,
) -> Result<AdvantageRatios> {
    opts.efficiency.validate()?;
    let channel = VaporChannel::new(cell.clone(), probe_frequency).lossless(lossless);
    let full = advantage_on_channel(state, &channel, field, opts)?;
    let pure85 = advantage_on_channel(state, &channel.without(Isotope::Rb87), field, opts)?;
    let eff = opts.efficiency;
    Ok(AdvantageRatios {
        field,
        efficiency: eff,
        per_photon_ratio: full.per_photon,
        per_scatter_ratio: full.per_scatter,
        per_scatter_ratio_pure85: pure85.per_scatter,
        per_photon_adjusted: eff.ratio(full.per_photon),
        per_scatter_adjusted: full.per_scatter.map(|r| eff.ratio(r)),
        per_scatter_pure85_adjusted: pure85.per_scatter.map(|r| eff.ratio(r)),
        full,
        pure85,
    })
}
