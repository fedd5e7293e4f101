//! Detection probabilities `P_i = Tr[Pi_i T rho T^dagger]`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::Basis;
use super::povm::{Analyzer, PovmSet, TransferOperator};
use super::state::{trace_product, DensityMatrix, SinglePhotonState, TwoPhotonState};
use crate::atomic::TransferCoefficients;
use crate::{Error, Result};

/// A state and a POVM pre-expressed in the CIRC basis, where the cell acts diagonally.
#[derive(Clone, Debug)]
pub struct Measurement {
    rho: DMatrix<C64>,
    povm: Vec<DMatrix<C64>>,
}

impl Measurement {
    pub fn new(state: &DensityMatrix, povm: &PovmSet) -> Result<Self> {
        if state.dim() != povm.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: povm.dim(),
            });
        }
        Ok(Measurement {
            rho: state.matrix_in(Basis::Circ),
            povm: povm.in_basis(Basis::Circ).elements().to_vec(),
        })
    }

    pub fn pair(state: &TwoPhotonState) -> Self {
        Self::new(state.density(), &PovmSet::coincidences()).expect("4x4 state and POVM")
    }

    pub fn single(state: &SinglePhotonState, analyzer: &Analyzer) -> Self {
        Self::new(state.density(), &analyzer.povm()).expect("2x2 state and POVM")
    }

    pub fn outcomes(&self) -> usize {
        self.povm.len()
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn probabilities(&self, t: &TransferOperator) -> Result<Vec<f64>> {
        if t.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.dim(),
            });
        }
        let out = t.apply_circ(&self.rho);
        Ok(self.povm.iter().map(|p| trace_product(p, &out).re.max(0.0)).collect())
    }

    /// Probabilities for the cell coefficients, choosing the pair or single operator by dimension.
    pub fn probabilities_for(&self, t: &TransferCoefficients) -> Vec<f64> {
        let op = if self.dim() == 4 {
            TransferOperator::pair_from(t)
        } else {
            TransferOperator::single_from(t)
        };
        self.probabilities(&op).expect("dimension matched by construction")
    }

    /// Mean of a CIRC-diagonal operator over the pre-cell state.
    pub fn diagonal_expectation(&self, diag: &[f64]) -> f64 {
        diag.iter().enumerate().map(|(i, d)| d * self.rho[(i, i)].re).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProbabilities {
    pub hh: f64,
    pub hv: f64,
    pub vv: f64,
}

impl PairProbabilities {
    pub fn total(&self) -> f64 {
        self.hh + self.hv + self.vv
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.hh, self.hv, self.vv]
    }
}

/// Generic pair or single probabilities for any compatible POVM.
pub fn outcome_probabilities(state: &DensityMatrix, t: &TransferOperator, povm: &PovmSet) -> Result<Vec<f64>> {
    if t.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: t.dim(),
        });
    }
    Measurement::new(state, povm)?.probabilities(t)
}

/// `HH`, `HV`, `VV` coincidence probabilities.
pub fn pair_probabilities(state: &TwoPhotonState, t: &TransferOperator) -> Result<PairProbabilities> {
    let p = Measurement::pair(state).probabilities(t)?;
    Ok(PairProbabilities {
        hh: p[0],
        hv: p[1],
        vv: p[2],
    })
}

/// Probabilities of the analyzer's two ports.
pub fn single_probabilities(state: &SinglePhotonState, t_plus: C64, t_minus: C64, analyzer: &Analyzer) -> [f64; 2] {
    let p = Measurement::single(state, analyzer)
        .probabilities(&TransferOperator::single(t_plus, t_minus))
        .expect("2x2 operator");
    [p[0], p[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarimetry::state::make_noon_state;

    #[test]
    fn ideal_noon_identity_channel() {
        let s = make_noon_state(0.0, 1.0).unwrap();
        let p = pair_probabilities(&s, &TransferOperator::identity(4)).unwrap();
        assert!((p.hh - 0.5).abs() < 1e-15 && (p.vv - 0.5).abs() < 1e-15 && p.hv.abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = make_noon_state(0.0, 1.0).unwrap();
        let r = outcome_probabilities(s.density(), &TransferOperator::identity(2), &PovmSet::coincidences());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
