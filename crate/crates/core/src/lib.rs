//! Simulation of Faraday-rotation probing of a rubidium vapor with photon
//! pairs: atomic response, polarization optics, Fisher information against
//! an optimized single-photon limit, and two-photon state tomography.

pub mod atomic;
pub mod channel;
pub mod cli;
pub mod constants;
pub mod error;
pub mod grid;
pub mod metrology;
pub mod optimize;
pub mod polarimetry;
pub mod tomography;

pub use error::{Error, Result};
