//! Purity, NOON fidelity and photon distinguishability.

use serde::{Deserialize, Serialize};

use super::basis::Basis;
use super::state::{noon_vector, singlet_vector, TwoPhotonState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub purity: f64,
    pub noon_fidelity: f64,
    pub distinguishability: f64,
}

pub fn state_metrics(state: &TwoPhotonState, phi: f64) -> StateMetrics {
    StateMetrics {
        purity: state.purity(),
        noon_fidelity: state.overlap(&noon_vector(phi), Basis::Circ),
        distinguishability: state.overlap(&singlet_vector(), Basis::Hv),
    }
}

/// NOON phase maximizing `<N_phi|rho|N_phi>`: `2 phi = -arg rho_{++,--}`,
/// so the phase is defined modulo pi and returned in `[-pi/2, pi/2)`.
pub fn best_noon_phase(state: &TwoPhotonState) -> f64 {
    let m = state.matrix_in(Basis::Circ);
    let c = m[(0, 3)];
    if c.norm() == 0.0 {
        0.0
    } else {
        -0.5 * c.arg()
    }
}
