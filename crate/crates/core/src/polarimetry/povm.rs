//! Detection operators and the diagonal cell transfer operator.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::basis::{convert_operator, convert_vector, Basis};
use super::state::{bloch_vector, EIGEN_TOL};
use crate::atomic::TransferCoefficients;
use crate::{Error, Result};

/// Named positive operators, all written in one basis.
#[derive(Clone, Debug)]
pub struct PovmSet {
    basis: Basis,
    names: Vec<String>,
    elements: Vec<DMatrix<C64>>,
}

impl PovmSet {
    pub fn new(basis: Basis, elements: Vec<(String, DMatrix<C64>)>) -> Result<Self> {
        let dim = elements.first().map(|(_, m)| m.nrows()).unwrap_or(0);
        if !(dim == 2 || dim == 4) {
            return Err(Error::InvalidInput("POVM elements must be 2x2 or 4x4".into()));
        }
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for (name, m) in &elements {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            if (m - m.adjoint()).camax() > 1e-12 {
                return Err(Error::InvalidInput(format!("POVM element {name} is not Hermitian")));
            }
            if min_eigenvalue(m) < -EIGEN_TOL {
                return Err(Error::InvalidInput(format!("POVM element {name} is not positive")));
            }
            sum += m;
        }
        let rest = DMatrix::<C64>::identity(dim, dim) - sum;
        if min_eigenvalue(&rest) < -EIGEN_TOL {
            return Err(Error::InvalidInput("POVM elements sum to more than the identity".into()));
        }
        let (names, elements) = elements.into_iter().unzip();
        Ok(PovmSet { basis, names, elements })
    }

    /// Pair coincidences `HH`, `HV` (either order), `VV`.
    pub fn coincidences() -> Self {
        let d = |v: [f64; 4]| DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, v.map(|x| C64::new(x, 0.0))));
        PovmSet::new(
            Basis::Hv,
            vec![
                ("HH".into(), d([1.0, 0.0, 0.0, 0.0])),
                ("HV".into(), d([0.0, 1.0, 1.0, 0.0])),
                ("VV".into(), d([0.0, 0.0, 0.0, 1.0])),
            ],
        )
        .expect("coincidence projectors are valid")
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> &[DMatrix<C64>] {
        &self.elements
    }

    pub fn in_basis(&self, basis: Basis) -> PovmSet {
        PovmSet {
            basis,
            names: self.names.clone(),
            elements: self.elements.iter().map(|m| convert_operator(m, self.basis, basis)).collect(),
        }
    }

    /// Appends the completion `I - sum` as the named "none" outcome.
    pub fn with_no_click(&self) -> PovmSet {
        let dim = self.dim();
        let sum = self.elements.iter().fold(DMatrix::<C64>::zeros(dim, dim), |a, m| a + m);
        let mut out = self.clone();
        out.names.push("none".into());
        out.elements.push(DMatrix::<C64>::identity(dim, dim) - sum);
        out
    }
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Two-outcome projective analyzer for single photons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Analyzer {
    /// Port vectors in the CIRC basis.
    pub ports: [[C64; 2]; 2],
}

impl Analyzer {
    /// Ports `m1 = (cos(c/2), e^{id} sin(c/2))` and its orthogonal complement.
    pub fn from_angles(c: f64, d: f64) -> Self {
        let m1 = bloch_vector(c, d);
        let m2 = [C64::new(-(0.5 * c).sin(), 0.0), C64::from_polar((0.5 * c).cos(), d)];
        Analyzer { ports: [m1, m2] }
    }

    /// Linear analyzer with first port at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let hv = [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]];
        let to_circ = |v: [C64; 2]| {
            let w = convert_vector(&v, Basis::Hv, Basis::Circ);
            [w[0], w[1]]
        };
        Analyzer {
            ports: [to_circ(hv[0]), to_circ(hv[1])],
        }
    }

    pub fn horizontal_vertical() -> Self {
        Self::linear(0.0)
    }

    pub fn povm(&self) -> PovmSet {
        let proj = |v: &[C64; 2]| {
            let m = DMatrix::from_row_slice(2, 1, v);
            &m * m.adjoint()
        };
        PovmSet::new(
            Basis::Circ,
            vec![("first".into(), proj(&self.ports[0])), ("second".into(), proj(&self.ports[1]))],
        )
        .expect("orthonormal ports")
    }
}

/// Cell action on polarization; diagonal in the CIRC basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferOperator {
    diagonal: Vec<C64>,
}

impl TransferOperator {
    pub fn single(t_plus: C64, t_minus: C64) -> Self {
        TransferOperator {
            diagonal: vec![t_plus, t_minus],
        }
    }

    pub fn pair(t_plus: C64, t_minus: C64) -> Self {
        TransferOperator {
            diagonal: vec![t_plus * t_plus, t_plus * t_minus, t_minus * t_plus, t_minus * t_minus],
        }
    }

    pub fn single_from(t: &TransferCoefficients) -> Self {
        Self::single(t.t_plus, t.t_minus)
    }

    pub fn pair_from(t: &TransferCoefficients) -> Self {
        Self::pair(t.t_plus, t.t_minus)
    }

    pub fn identity(dim: usize) -> Self {
        TransferOperator {
            diagonal: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[C64] {
        &self.diagonal
    }

    pub fn operator_norm(&self) -> f64 {
        self.diagonal.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Full matrix in `basis`.
    pub fn matrix(&self, basis: Basis) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        convert_operator(&d, Basis::Circ, basis)
    }

    /// `T rho T^dagger` for a CIRC-basis matrix.
    pub fn apply_circ(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(rho.nrows(), rho.ncols(), |r, c| {
            self.diagonal[r] * rho[(r, c)] * self.diagonal[c].conj()
        })
    }
}
