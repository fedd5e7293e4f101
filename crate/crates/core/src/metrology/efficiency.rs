//! Detection and path efficiency outside the atomic medium.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficiencyModel {
    pub detection: f64,
    pub path: f64,
}

impl Default for EfficiencyModel {
    fn default() -> Self {
        EfficiencyModel {
            detection: 0.95,
            path: 0.984,
        }
    }
}

impl EfficiencyModel {
    pub fn ideal() -> Self {
        EfficiencyModel {
            detection: 1.0,
            path: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("detection", self.detection), ("path", self.path)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidInput(format!("{name} efficiency {v} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Combined extrinsic efficiency.
    pub fn extrinsic(&self) -> f64 {
        self.detection * self.path
    }

    /// Pair Fisher information after both photons pass the extrinsic losses.
    pub fn pair_fisher(&self, fisher: f64) -> f64 {
        fisher * self.extrinsic().powi(2)
    }

    pub fn single_fisher(&self, fisher: f64) -> f64 {
        fisher * self.extrinsic()
    }

    /// Adjusts a NOON-to-single-photon ratio.
    pub fn ratio(&self, ratio: f64) -> f64 {
        ratio * self.extrinsic()
    }
}
