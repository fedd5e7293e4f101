//! Two-photon state tomography from coincidence counts across a field scan.

mod band;
mod dataset;
mod model;
mod reconstruct;
mod simulate;

pub use band::{fi_error_band, profile_band, BandOptions};
pub use dataset::{CoincidenceDataset, CountRecord};
pub use model::{
    factor_from_params, hermitian_coordinates, hermitian_from_coordinates, operator_from_params, params_from_factor,
    CountModel, PARAMETERS,
};
pub use reconstruct::{
    fringe_span, reconstruct, swap_average, FiBand, Identifiability, ReconstructOptions, RestartSummary, TomographyResult,
    MIN_POINTS,
};
pub use simulate::{expected_counts, simulate_counts};
