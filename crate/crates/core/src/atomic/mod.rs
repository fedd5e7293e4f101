//! First-principles optical response of the two-isotope rubidium vapor.

pub mod cell;
pub mod levels;
pub mod lineshape;
pub mod transitions;
pub mod vapor;

pub use cell::{
    cell_transmission, complex_index, transmission_spectrum, CellConfig, FieldProfile, IsotopeFactor, IsotopeIndex, Species,
    TransferCoefficients,
};
pub use levels::{diagonalize_levels, hamiltonian, Level, LevelDiagram, Manifold, ProductState};
pub use lineshape::{doppler_width, faddeeva, voigt_profile};
pub use transitions::{transition_table, Transition};
pub use vapor::{vapor_density, vapor_pressure};
