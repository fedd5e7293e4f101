//! Photon polarization states, the cell channel acting on them, and detection.

pub mod basis;
mod fringes;
mod metrics;
mod povm;
mod probabilities;
mod state;

pub use basis::{circ_to_hv, convert_operator, convert_vector, Basis};
pub use fringes::{
    analyze_fringe, fringe_scan, pair_signal, singles_signal, Extremum, ExtremumKind, FringeAnalysis, FringeRow,
    FringeTable,
};

pub(crate) use fringes::{csv_err, fmt as fmt_float};
pub use metrics::{best_noon_phase, state_metrics, StateMetrics};
pub use povm::{Analyzer, PovmSet, TransferOperator};
pub use probabilities::{
    outcome_probabilities, pair_probabilities, single_probabilities, Measurement, PairProbabilities,
};
pub use state::{
    bloch_vector, make_noon_state, mixing_for_fidelity, noon_vector, singlet_vector, symmetric_projector,
    DensityMatrix, SinglePhotonState, TwoPhotonState, EIGEN_TOL, HERMITIAN_TOL, TRACE_TOL,
};
