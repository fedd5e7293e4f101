//! Mean number of photons scattered by the Rb-85 atoms.

use serde::{Deserialize, Serialize};

use crate::atomic::TransferCoefficients;
use crate::constants::Isotope;
use crate::polarimetry::{Basis, DensityMatrix};
use crate::{Error, Result};

/// Diagonal scattering operator in the CIRC basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOperator {
    /// `s_a = 1 - |t_a^(85)|^2` for a = +, -.
    pub single: [f64; 2],
}

impl ScatteringOperator {
    pub fn from_intensities(plus: f64, minus: f64) -> Self {
        ScatteringOperator {
            single: [1.0 - plus, 1.0 - minus],
        }
    }

    pub fn from_coefficients(t: &TransferCoefficients) -> Self {
        let (p, m) = t.factor(Isotope::Rb85);
        Self::from_intensities(p.norm_sqr(), m.norm_sqr())
    }

    /// `(s_++, s_+-, s_-+, s_--)` with `s_ab = s_a + s_b`.
    pub fn pair(&self) -> [f64; 4] {
        let [p, m] = self.single;
        [2.0 * p, p + m, m + p, 2.0 * m]
    }

    pub fn diagonal(&self, dim: usize) -> Result<Vec<f64>> {
        match dim {
            2 => Ok(self.single.to_vec()),
            4 => Ok(self.pair().to_vec()),
            _ => Err(Error::DimensionMismatch { expected: 4, found: dim }),
        }
    }
}

/// `S = Tr[rho Pi_scat]` for the pre-cell state.
pub fn scattering_mean(state: &DensityMatrix, op: &ScatteringOperator) -> Result<f64> {
    let diag = op.diagonal(state.dim())?;
    let rho = state.matrix_in(Basis::Circ);
    Ok(diag.iter().enumerate().map(|(i, s)| s * rho[(i, i)].re).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarimetry::make_noon_state;

    #[test]
    fn noon_scattering() {
        let s = make_noon_state(0.4, 1.0).unwrap();
        let op = ScatteringOperator::from_intensities(0.9, 0.8);
        assert!((scattering_mean(s.density(), &op).unwrap() - 0.3).abs() < 1e-15);
        let opaque = ScatteringOperator::from_intensities(0.0, 0.0);
        assert!((scattering_mean(s.density(), &opaque).unwrap() - 2.0).abs() < 1e-15);
    }
}
