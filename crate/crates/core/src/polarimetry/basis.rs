//! Polarization bases and the single conversion point between them.
//!
//! Convention used throughout the crate: `|L> = (|H> + i|V>)/sqrt(2)` is the
//! sigma+ mode and `|R> = (|H> - i|V>)/sqrt(2)` the sigma- mode. A Faraday
//! rotation by `theta` multiplies sigma+/sigma- amplitudes by `exp(-/+ i theta)`
//! and maps `|H>` to `cos(theta)|H> + sin(theta)|V>`.
//!
//! Two-photon bases are ordered with the first photon as the major index:
//! `(HH, HV, VH, VV)` and `(++, +-, -+, --)`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "HV")]
    Hv,
    #[serde(rename = "CIRC")]
    Circ,
}

/// Columns are |L> and |R> written in the (H, V) basis.
pub fn circ_to_hv_single() -> DMatrix<C64> {
    let s = FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, -s)],
    )
}

/// Unitary taking CIRC-basis components to HV-basis components for a
/// `dim`-dimensional (2 or 4) polarization space.
pub fn circ_to_hv(dim: usize) -> DMatrix<C64> {
    let u = circ_to_hv_single();
    match dim {
        2 => u,
        4 => u.kronecker(&u),
        _ => panic!("polarization space must have dimension 2 or 4, got {dim}"),
    }
}

/// Re-expresses an operator given in basis `from` in basis `to`.
pub fn convert_operator(m: &DMatrix<C64>, from: Basis, to: Basis) -> DMatrix<C64> {
    if from == to {
        return m.clone();
    }
    let u = circ_to_hv(m.nrows());
    match (from, to) {
        (Basis::Circ, Basis::Hv) => &u * m * u.adjoint(),
        (Basis::Hv, Basis::Circ) => u.adjoint() * m * &u,
        _ => unreachable!(),
    }
}

/// Re-expresses a state vector given in basis `from` in basis `to`.
pub fn convert_vector(v: &[C64], from: Basis, to: Basis) -> Vec<C64> {
    if from == to {
        return v.to_vec();
    }
    let u = circ_to_hv(v.len());
    let u = match (from, to) {
        (Basis::Circ, Basis::Hv) => u,
        _ => u.adjoint(),
    };
    (0..v.len())
        .map(|r| (0..v.len()).map(|c| u[(r, c)] * v[c]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary() {
        let u = circ_to_hv(4);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((&u * u.adjoint() - id).camax() < 1e-15);
    }

    #[test]
    fn rotation_convention() {
        // sigma+/- phases exp(-/+ i theta) applied to |H> rotate it by +theta.
        let theta: f64 = 0.3;
        let h_circ = convert_vector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], Basis::Hv, Basis::Circ);
        let out = [h_circ[0] * C64::from_polar(1.0, -theta), h_circ[1] * C64::from_polar(1.0, theta)];
        let hv = convert_vector(&out, Basis::Circ, Basis::Hv);
        assert!((hv[0] - C64::new(theta.cos(), 0.0)).norm() < 1e-15);
        assert!((hv[1] - C64::new(theta.sin(), 0.0)).norm() < 1e-15);
    }
}
