//! Fisher information over a field grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fisher::{fisher_information, with_no_click, FisherPoint};
use super::scattering::ScatteringOperator;
use crate::channel::Channel;
use crate::grid::validate_grid;
use crate::polarimetry::{csv_err, fmt_float, Measurement, PovmSet, TwoPhotonState};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherCurvePoint {
    #[serde(flatten)]
    pub fisher: FisherPoint,
    pub scattering: f64,
    pub fisher_per_scatter: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherCurve {
    pub outcomes: Vec<String>,
    pub points: Vec<FisherCurvePoint>,
}

/// Pair Fisher information and scattering of `state` at every grid field.
pub fn fisher_curve<C: Channel>(
    state: &TwoPhotonState,
    channel: &C,
    grid: &[f64],
    step: f64,
    include_no_click: bool,
) -> Result<FisherCurve> {
    validate_grid(grid)?;
    let m = Measurement::pair(state);
    let mut outcomes = PovmSet::coincidences().names().to_vec();
    if include_no_click {
        outcomes.push("none".into());
    }
    let points = grid
        .par_iter()
        .map(|&b| {
            let fisher = fisher_information(
                |x| {
                    let p = m.probabilities_for(&channel.coefficients(x)?);
                    Ok(if include_no_click { with_no_click(p) } else { p })
                },
                b,
                step,
            )?;
            let op = ScatteringOperator::from_coefficients(&channel.coefficients(b)?);
            let scattering = m.diagonal_expectation(&op.pair());
            let fisher_per_scatter = (scattering > 0.0).then(|| fisher.total / scattering);
            Ok(FisherCurvePoint {
                fisher,
                scattering,
                fisher_per_scatter,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FisherCurve { outcomes, points })
}

impl FisherCurve {
    /// CSV in mT and 1/mT^2: `B_mT,P_HH,P_HV,P_VV,FI_total,FI_HH,FI_HV,FI_VV,S,FI_over_S`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["B_mT".to_string()];
        header.extend(self.outcomes.iter().map(|o| format!("P_{o}")));
        header.push("FI_total".into());
        header.extend(self.outcomes.iter().map(|o| format!("FI_{o}")));
        header.extend(["S".into(), "FI_over_S".into()]);
        w.write_record(&header).map_err(csv_err)?;
        let per_mt2 = 1e-6;
        for p in &self.points {
            let mut rec = vec![fmt_float(p.fisher.field * 1e3)];
            rec.extend(p.fisher.probabilities.iter().map(|&x| fmt_float(x)));
            rec.push(fmt_float(p.fisher.total * per_mt2));
            rec.extend(p.fisher.contributions.iter().map(|&x| fmt_float(x * per_mt2)));
            rec.push(fmt_float(p.scattering));
            rec.push(p.fisher_per_scatter.map(|x| fmt_float(x * per_mt2)).unwrap_or_default());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Internal(e.to_string()))
    }
}
