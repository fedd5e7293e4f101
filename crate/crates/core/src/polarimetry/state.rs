//! Polarization density matrices for one and two photons.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::basis::{convert_operator, convert_vector, Basis};
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;

/// A validated density matrix (Hermitian, unit trace, PSD) tagged with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<C64>,
    basis: Basis,
}

impl DensityMatrix {
    pub fn new(rho: DMatrix<C64>, basis: Basis) -> Result<Self> {
        check_physical(&rho)?;
        Ok(DensityMatrix { rho, basis })
    }

    /// Hermitizes and normalizes a positive operator before validation.
    pub fn from_positive(m: &DMatrix<C64>, basis: Basis) -> Result<Self> {
        let h = (m + m.adjoint()).scale(0.5);
        let tr = h.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidInput(format!("operator trace {tr} is not positive")));
        }
        Self::new(h.unscale(tr), basis)
    }

    pub fn pure(vector: &[C64], basis: Basis) -> Result<Self> {
        let norm = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("state vector has zero or non-finite norm".into()));
        }
        let v = DMatrix::from_iterator(vector.len(), 1, vector.iter().map(|c| c / norm));
        Self::from_positive(&(&v * v.adjoint()), basis)
    }

    pub fn maximally_mixed(dim: usize, basis: Basis) -> Self {
        let rho = DMatrix::<C64>::identity(dim, dim).unscale(dim as f64);
        DensityMatrix { rho, basis }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// The matrix expressed in `basis`.
    pub fn matrix_in(&self, basis: Basis) -> DMatrix<C64> {
        convert_operator(&self.rho, self.basis, basis)
    }

    pub fn to_basis(&self, basis: Basis) -> Self {
        DensityMatrix {
            rho: self.matrix_in(basis),
            basis,
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    /// `Tr[rho A]` for an operator written in `basis`.
    pub fn expectation(&self, op: &DMatrix<C64>, basis: Basis) -> C64 {
        let a = convert_operator(op, basis, self.basis);
        trace_product(&self.rho, &a)
    }

    /// `<psi|rho|psi>` for a vector written in `basis` (normalized internally).
    pub fn overlap(&self, psi: &[C64], basis: Basis) -> f64 {
        let v = convert_vector(psi, basis, self.basis);
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let mut acc = C64::new(0.0, 0.0);
        for (r, vr) in v.iter().enumerate() {
            for (c, vc) in v.iter().enumerate() {
                acc += vr.conj() * self.rho[(r, c)] * vc;
            }
        }
        acc.re / norm
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let s = psd_sqrt(&self.rho);
        let sigma = other.matrix_in(self.basis);
        let inner = &s * sigma * &s;
        let eig = SymmetricEigen::new((&inner + inner.adjoint()).scale(0.5));
        let cut = RANK_CUTOFF * eig.eigenvalues.max().max(0.0);
        let tr: f64 = eig.eigenvalues.iter().filter(|&&l| l > cut).map(|&l| l.sqrt()).sum();
        Ok((tr * tr).min(1.0))
    }
}

pub(crate) fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues below this fraction of the largest are rounding noise of a rank-deficient matrix.
const RANK_CUTOFF: f64 = 1e-13;

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(m.clone());
    let cut = RANK_CUTOFF * eig.eigenvalues.max().max(0.0);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(if l > cut { l.sqrt() } else { 0.0 }, 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

fn check_physical(rho: &DMatrix<C64>) -> Result<()> {
    let n = rho.nrows();
    if n != rho.ncols() || !(n == 2 || n == 4) {
        return Err(Error::InvalidInput(format!(
            "density matrix must be 2x2 or 4x4, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if rho.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite("density matrix entry".into()));
    }
    let herm = (rho - rho.adjoint()).camax();
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidInput(format!("density matrix not Hermitian (deviation {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidInput(format!("density matrix trace {tr} differs from 1")));
    }
    let h = (rho + rho.adjoint()).scale(0.5);
    let min = SymmetricEigen::new(h).eigenvalues.min();
    if min < -EIGEN_TOL {
        return Err(Error::InvalidInput(format!("density matrix has negative eigenvalue {min:e}")));
    }
    Ok(())
}

macro_rules! photon_state {
    ($name:ident, $dim:expr, $what:expr) => {
        #[doc = concat!("Polarization state of ", $what, ".")]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(DensityMatrix);

        impl $name {
            pub const DIM: usize = $dim;

            pub fn new(rho: DMatrix<C64>, basis: Basis) -> Result<Self> {
                Self::from_density(DensityMatrix::new(rho, basis)?)
            }

            pub fn from_density(d: DensityMatrix) -> Result<Self> {
                if d.dim() != $dim {
                    return Err(Error::DimensionMismatch {
                        expected: $dim,
                        found: d.dim(),
                    });
                }
                Ok($name(d))
            }

            pub fn pure(vector: &[C64], basis: Basis) -> Result<Self> {
                if vector.len() != $dim {
                    return Err(Error::DimensionMismatch {
                        expected: $dim,
                        found: vector.len(),
                    });
                }
                Ok($name(DensityMatrix::pure(vector, basis)?))
            }

            pub fn maximally_mixed(basis: Basis) -> Self {
                $name(DensityMatrix::maximally_mixed($dim, basis))
            }

            pub fn to_basis(&self, basis: Basis) -> Self {
                $name(self.0.to_basis(basis))
            }

            pub fn density(&self) -> &DensityMatrix {
                &self.0
            }
        }

        impl std::ops::Deref for $name {
            type Target = DensityMatrix;
            fn deref(&self) -> &DensityMatrix {
                &self.0
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                StateRecord::from(&self.0).serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let rec = StateRecord::deserialize(d)?;
                let m = rec.to_matrix().map_err(serde::de::Error::custom)?;
                $name::new(m, rec.basis).map_err(serde::de::Error::custom)
            }
        }
    };
}

photon_state!(SinglePhotonState, 2, "a single photon");
photon_state!(TwoPhotonState, 4, "a photon pair in two distinguishable modes");

/// Row-major matrix of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct StateRecord {
    basis: Basis,
    rho: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for StateRecord {
    fn from(d: &DensityMatrix) -> Self {
        let n = d.dim();
        StateRecord {
            basis: d.basis,
            rho: (0..n)
                .map(|r| (0..n).map(|c| [d.rho[(r, c)].re, d.rho[(r, c)].im]).collect())
                .collect(),
        }
    }
}

impl StateRecord {
    fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.rho.len();
        if self.rho.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("density matrix rows have unequal length".into()));
        }
        Ok(DMatrix::from_fn(n, n, |r, c| {
            let [re, im] = self.rho[r][c];
            C64::new(re, im)
        }))
    }
}

impl SinglePhotonState {
    /// Pure state `cos(a/2)|L> + exp(i b) sin(a/2)|R>`.
    pub fn from_angles(a: f64, b: f64) -> Result<Self> {
        Self::pure(&bloch_vector(a, b), Basis::Circ)
    }

    /// Linear polarization at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        let v = [C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)];
        Self::pure(&v, Basis::Hv).expect("unit vector")
    }
}

/// Components `(cos(a/2), exp(i b) sin(a/2))`.
pub fn bloch_vector(a: f64, b: f64) -> [C64; 2] {
    [C64::new((0.5 * a).cos(), 0.0), C64::from_polar((0.5 * a).sin(), b)]
}

/// `|psi->` = (|HV> - |VH>)/sqrt(2) in the HV basis.
pub fn singlet_vector() -> [C64; 4] {
    let s = FRAC_1_SQRT_2;
    [C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)]
}

/// `|N_phi>` = (|++> + exp(2 i phi)|-->)/sqrt(2) in the CIRC basis.
pub fn noon_vector(phi: f64) -> [C64; 4] {
    let s = FRAC_1_SQRT_2;
    [
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(s, 2.0 * phi),
    ]
}

/// Projector onto the symmetric (triplet) subspace, CIRC basis.
pub fn symmetric_projector() -> DMatrix<C64> {
    let mut p = DMatrix::<C64>::identity(4, 4);
    p[(1, 1)] = C64::new(0.5, 0.0);
    p[(2, 2)] = C64::new(0.5, 0.0);
    p[(1, 2)] = C64::new(0.5, 0.0);
    p[(2, 1)] = C64::new(0.5, 0.0);
    p
}

/// `p |N_phi><N_phi| + (1 - p) P_sym / 3`, expressed in the CIRC basis.
pub fn make_noon_state(phi: f64, p: f64) -> Result<TwoPhotonState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("mixing weight {p} outside [0, 1]")));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite("NOON phase".into()));
    }
    let v = DMatrix::from_row_slice(4, 1, &noon_vector(phi));
    let pure = &v * v.adjoint();
    let rho = pure.scale(p) + symmetric_projector().scale((1.0 - p) / 3.0);
    TwoPhotonState::from_density(DensityMatrix::from_positive(&rho, Basis::Circ)?)
}

/// Mixing weight that gives NOON fidelity `f` in [`make_noon_state`].
pub fn mixing_for_fidelity(f: f64) -> Result<f64> {
    if !(1.0 / 3.0..=1.0).contains(&f) {
        return Err(Error::InvalidInput(format!("NOON fidelity {f} outside [1/3, 1]")));
    }
    Ok((3.0 * f - 1.0) / 2.0)
}
