//! Hyperfine-Zeeman structure of the D1 manifolds.
//!
//! Both 5S1/2 and 5P1/2 have J = 1/2, so the Hamiltonian
//! `H = A J.I + (mu_B B / h)(g_J J_z + g_I I_z)` is written in the uncoupled
//! `|m_J, m_I>` basis and diagonalized block by block in `m_F = m_J + m_I`.
//! Energies are in Hz relative to the manifold centroid; the fine-structure
//! offset is carried separately in [`LevelDiagram::centroid`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{IsotopeConstants, BOHR_MAGNETON_HZ_PER_T};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manifold {
    /// 5S1/2
    Ground,
    /// 5P1/2
    Excited,
}

/// Uncoupled basis label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub m_j: f64,
    pub m_i: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Hz, relative to the manifold centroid.
    pub energy: f64,
    pub m_f: f64,
    /// Components in the product basis of the owning diagram.
    pub vector: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagram {
    pub field: f64,
    pub manifold: Manifold,
    /// Absolute energy of the zero-field centroid, Hz (0 for the ground manifold).
    pub centroid: f64,
    pub basis: Vec<ProductState>,
    /// Sorted by ascending energy.
    pub levels: Vec<Level>,
}

impl LevelDiagram {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Matrix whose columns are the eigenvectors.
    pub fn eigenvector_matrix(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, self.levels.len(), |r, c| self.levels[c].vector[r])
    }
}

fn manifold_parameters(iso: &IsotopeConstants, manifold: Manifold) -> (f64, f64, f64) {
    match manifold {
        Manifold::Ground => (iso.a_hfs_ground, iso.g_j_ground, 0.0),
        Manifold::Excited => (iso.a_hfs_excited, iso.g_j_excited, iso.d1_frequency),
    }
}

/// Product basis ordered with `m_J` outer (-1/2, +1/2) and `m_I` inner (-I..I).
pub fn product_basis(iso: &IsotopeConstants) -> Vec<ProductState> {
    let ni = iso.nuclear_multiplicity();
    let mut basis = Vec::with_capacity(2 * ni);
    for m_j in [-0.5, 0.5] {
        for k in 0..ni {
            basis.push(ProductState {
                m_j,
                m_i: -iso.nuclear_spin + k as f64,
            });
        }
    }
    basis
}

fn ladder(j: f64, m: f64, up: bool) -> f64 {
    let mm = if up { m * (m + 1.0) } else { m * (m - 1.0) };
    (j * (j + 1.0) - mm).max(0.0).sqrt()
}

/// Full Hamiltonian (Hz, centroid removed) in the product basis.
pub fn hamiltonian(iso: &IsotopeConstants, manifold: Manifold, field: f64) -> DMatrix<f64> {
    let (a_hfs, g_j, _) = manifold_parameters(iso, manifold);
    let basis = product_basis(iso);
    let n = basis.len();
    let i = iso.nuclear_spin;
    let j = 0.5;
    let mu = BOHR_MAGNETON_HZ_PER_T * field;
    let mut h = DMatrix::zeros(n, n);
    for (r, bra) in basis.iter().enumerate() {
        for (c, ket) in basis.iter().enumerate() {
            let mut v = 0.0;
            if r == c {
                v += a_hfs * ket.m_j * ket.m_i + mu * (g_j * ket.m_j + iso.g_i * ket.m_i);
            }
            // J+ I- and J- I+ halves of J.I
            if bra.m_j == ket.m_j + 1.0 && bra.m_i == ket.m_i - 1.0 {
                v += 0.5 * a_hfs * ladder(j, ket.m_j, true) * ladder(i, ket.m_i, false);
            }
            if bra.m_j == ket.m_j - 1.0 && bra.m_i == ket.m_i + 1.0 {
                v += 0.5 * a_hfs * ladder(j, ket.m_j, false) * ladder(i, ket.m_i, true);
            }
            h[(r, c)] = v;
        }
    }
    h
}

/// Eigen-energies and eigenvectors of one D1 manifold at field `field` (T).
///
/// Negative fields are accepted; they reverse the Zeeman term.
pub fn diagonalize_levels(
    iso: &IsotopeConstants,
    manifold: Manifold,
    field: f64,
) -> Result<LevelDiagram> {
    if !field.is_finite() {
        return Err(Error::invalid("field must be finite"));
    }
    let (_, _, centroid) = manifold_parameters(iso, manifold);
    let basis = product_basis(iso);
    let h = hamiltonian(iso, manifold, field);
    let n = basis.len();

    // Blocks of constant m_F; twice m_F is an integer key.
    let mut blocks: Vec<(i64, Vec<usize>)> = Vec::new();
    for (idx, s) in basis.iter().enumerate() {
        let key = (2.0 * (s.m_j + s.m_i)).round() as i64;
        match blocks.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(idx),
            None => blocks.push((key, vec![idx])),
        }
    }

    let mut levels = Vec::with_capacity(n);
    for (key, members) in blocks {
        let m = members.len();
        let sub = DMatrix::from_fn(m, m, |r, c| h[(members[r], members[c])]);
        let eig = sub.symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Internal("non-finite eigenvalue from Hermitian block".into()));
        }
        for k in 0..m {
            let mut vector = vec![0.0; n];
            for (r, &row) in members.iter().enumerate() {
                vector[row] = eig.eigenvectors[(r, k)];
            }
            fix_phase(&mut vector);
            levels.push(Level {
                energy: eig.eigenvalues[k],
                m_f: key as f64 / 2.0,
                vector,
            });
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.m_f.total_cmp(&b.m_f)));

    Ok(LevelDiagram {
        field,
        manifold,
        centroid,
        basis,
        levels,
    })
}

/// Makes the largest-magnitude component positive (first one on ties).
fn fix_phase(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-12)) {
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
