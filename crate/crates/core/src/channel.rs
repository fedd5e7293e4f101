//! Field-dependent polarization channels.

use num_complex::Complex64 as C64;

use crate::atomic::{cell_transmission, CellConfig, IsotopeFactor, TransferCoefficients};
use crate::constants::Isotope;
use crate::Result;

/// Anything that maps a center field (T) to cell transmission coefficients.
pub trait Channel: Sync {
    fn coefficients(&self, field: f64) -> Result<TransferCoefficients>;
}

/// The modeled vapor cell probed at a fixed optical frequency.
#[derive(Clone, Debug)]
pub struct VaporChannel {
    pub cell: CellConfig,
    /// Probe frequency, Hz.
    pub probe: f64,
    /// Keep the phases but drop all absorption.
    pub lossless: bool,
}

impl VaporChannel {
    pub fn new(cell: CellConfig, probe: f64) -> Self {
        VaporChannel {
            cell,
            probe,
            lossless: false,
        }
    }

    pub fn lossless(mut self, on: bool) -> Self {
        self.lossless = on;
        self
    }

    pub fn without(&self, isotope: Isotope) -> Self {
        VaporChannel {
            cell: self.cell.without(isotope),
            ..self.clone()
        }
    }
}

impl Channel for VaporChannel {
    fn coefficients(&self, field: f64) -> Result<TransferCoefficients> {
        let t = cell_transmission(&self.cell, self.probe, field)?;
        Ok(if self.lossless { t.lossless() } else { t })
    }
}

/// Synthetic channel: rotation `theta = rate * B` with a field-independent
/// amplitude, attributed entirely to Rb-85.
#[derive(Clone, Copy, Debug)]
pub struct RotationChannel {
    /// rad/T
    pub rate: f64,
    pub amplitude: f64,
}

impl RotationChannel {
    pub fn lossless(rate: f64) -> Self {
        RotationChannel { rate, amplitude: 1.0 }
    }
}

impl Channel for RotationChannel {
    fn coefficients(&self, field: f64) -> Result<TransferCoefficients> {
        let theta = self.rate * field;
        Ok(TransferCoefficients::from_factors(vec![IsotopeFactor {
            isotope: Isotope::Rb85,
            plus: C64::from_polar(self.amplitude, -theta),
            minus: C64::from_polar(self.amplitude, theta),
        }]))
    }
}

impl<C: Channel + ?Sized> Channel for &C {
    fn coefficients(&self, field: f64) -> Result<TransferCoefficients> {
        (**self).coefficients(field)
    }
}
