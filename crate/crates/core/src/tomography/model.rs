//! Linear count model `lambda_ij = t_j Tr[K_ij X]` with `X = L L^dagger`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::dataset::CoincidenceDataset;
use crate::channel::Channel;
use crate::polarimetry::{Basis, PovmSet, TransferOperator};
use crate::Result;

/// Number of real parameters of a 4x4 lower-triangular factor with real diagonal.
pub const PARAMETERS: usize = 16;

/// Builds `L` from `[d0..d3, re/im of (1,0), (2,0), (2,1), (3,0), (3,1), (3,2)]`.
pub fn factor_from_params(p: &[f64]) -> DMatrix<C64> {
    let mut l = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        l[(i, i)] = C64::new(p[i], 0.0);
    }
    let mut k = 4;
    for a in 1..4 {
        for b in 0..a {
            l[(a, b)] = C64::new(p[k], p[k + 1]);
            k += 2;
        }
    }
    l
}

/// Inverse of [`factor_from_params`] for a lower-triangular matrix.
pub fn params_from_factor(l: &DMatrix<C64>) -> Vec<f64> {
    let mut p = vec![0.0; PARAMETERS];
    for i in 0..4 {
        p[i] = l[(i, i)].re;
    }
    let mut k = 4;
    for a in 1..4 {
        for b in 0..a {
            p[k] = l[(a, b)].re;
            p[k + 1] = l[(a, b)].im;
            k += 2;
        }
    }
    p
}

/// Positive operator `X = L L^dagger` (CIRC basis); its trace is the pair flux.
pub fn operator_from_params(p: &[f64]) -> DMatrix<C64> {
    let l = factor_from_params(p);
    &l * l.adjoint()
}

/// Coordinates of a Hermitian 4x4 matrix in the Frobenius-orthonormal basis
/// `E_aa`, `(E_ab + E_ba)/sqrt 2`, `i(E_ab - E_ba)/sqrt 2` (a < b).
pub fn hermitian_coordinates(x: &DMatrix<C64>) -> DVector<f64> {
    let mut v = DVector::zeros(PARAMETERS);
    for a in 0..4 {
        v[a] = x[(a, a)].re;
    }
    let mut k = 4;
    for a in 0..4 {
        for b in a + 1..4 {
            let m = 0.5 * (x[(a, b)] + x[(b, a)].conj());
            v[k] = std::f64::consts::SQRT_2 * m.re;
            v[k + 1] = std::f64::consts::SQRT_2 * m.im;
            k += 2;
        }
    }
    v
}

/// Inverse of [`hermitian_coordinates`].
pub fn hermitian_from_coordinates(v: &DVector<f64>) -> DMatrix<C64> {
    let mut x = DMatrix::<C64>::zeros(4, 4);
    for a in 0..4 {
        x[(a, a)] = C64::new(v[a], 0.0);
    }
    let mut k = 4;
    for a in 0..4 {
        for b in a + 1..4 {
            let m = C64::new(v[k], v[k + 1]) / std::f64::consts::SQRT_2;
            x[(a, b)] = m;
            x[(b, a)] = m.conj();
            k += 2;
        }
    }
    x
}

/// Per-record detection operators `t_j T^dagger Pi_i T` in the CIRC basis.
#[derive(Clone, Debug)]
pub struct CountModel {
    pub operators: Vec<[DMatrix<C64>; 3]>,
    pub counts: Vec<[f64; 3]>,
    pub weights: Vec<[f64; 3]>,
}

impl CountModel {
    pub fn new<C: Channel>(dataset: &CoincidenceDataset, channel: &C) -> Result<Self> {
        let povm = PovmSet::coincidences().in_basis(Basis::Circ);
        let mut operators = Vec::with_capacity(dataset.len());
        for r in &dataset.records {
            let t = channel.coefficients(r.field)?;
            let d = TransferOperator::pair_from(&t);
            let diag = d.diagonal();
            let k = |pi: &DMatrix<C64>| {
                DMatrix::from_fn(4, 4, |a, b| diag[a].conj() * pi[(a, b)] * diag[b] * r.integration_time)
            };
            let e = povm.elements();
            operators.push([k(&e[0]), k(&e[1]), k(&e[2])]);
        }
        let counts: Vec<[f64; 3]> = dataset.records.iter().map(|r| r.counts).collect();
        let weights = counts.iter().map(|c| c.map(|n| 1.0 / n.max(1.0))).collect();
        Ok(CountModel {
            operators,
            counts,
            weights,
        })
    }

    /// Expected counts for an unnormalized state `X` (flux times density matrix).
    pub fn expected(&self, x: &DMatrix<C64>) -> Vec<[f64; 3]> {
        self.operators
            .iter()
            .map(|ks| ks.clone().map(|k| trace_product_re(&k, x)))
            .collect()
    }

    pub fn chi2_of_operator(&self, x: &DMatrix<C64>) -> f64 {
        self.expected(x)
            .iter()
            .zip(&self.counts)
            .zip(&self.weights)
            .map(|((m, n), w)| (0..3).map(|i| w[i] * (n[i] - m[i]).powi(2)).sum::<f64>())
            .sum()
    }

    pub fn chi2(&self, p: &[f64]) -> f64 {
        self.chi2_of_operator(&operator_from_params(p))
    }

    /// Weighted residuals `(N - lambda)/sqrt(max(N,1))` and their Jacobian in the parameters.
    pub fn residuals_and_jacobian(&self, p: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let l = factor_from_params(p);
        let ld = l.adjoint();
        let x = &l * &ld;
        let rows = 3 * self.operators.len();
        let mut res = Vec::with_capacity(rows);
        let mut jac = DMatrix::<f64>::zeros(rows, PARAMETERS);
        for (j, ks) in self.operators.iter().enumerate() {
            for (i, k) in ks.iter().enumerate() {
                let row = 3 * j + i;
                let sw = self.weights[j][i].sqrt();
                let m = trace_product_re(k, &x);
                res.push(sw * (self.counts[j][i] - m));
                // d Tr[K L L^+] = 2 Re Tr[K dL L^+] = 2 Re (L^+ K)_{ba} for dL = E_ab.
                let lk = &ld * k;
                for d in 0..4 {
                    jac[(row, d)] = -sw * 2.0 * lk[(d, d)].re;
                }
                let mut c = 4;
                for a in 1..4 {
                    for b in 0..a {
                        let g = lk[(b, a)];
                        jac[(row, c)] = -sw * 2.0 * g.re;
                        jac[(row, c + 1)] = sw * 2.0 * g.im;
                        c += 2;
                    }
                }
            }
        }
        (res, jac)
    }

    /// Weighted design `(A, y)` with `chi2(X) = |y - A v|^2` for `v` the
    /// [`hermitian_coordinates`] of `X`.
    pub fn design(&self) -> (DMatrix<f64>, DVector<f64>) {
        let rows = 3 * self.operators.len();
        let mut a = DMatrix::<f64>::zeros(rows, PARAMETERS);
        let mut y = DVector::<f64>::zeros(rows);
        for (j, ((ks, n), w)) in self.operators.iter().zip(&self.counts).zip(&self.weights).enumerate() {
            for i in 0..3 {
                // Tr[K X] = sum_m v_m Tr[K B_m], and Tr[K B_m] are the coordinates of K.
                let sw = w[i].sqrt();
                a.row_mut(3 * j + i).tr_copy_from(&(hermitian_coordinates(&ks[i]) * sw));
                y[3 * j + i] = sw * n[i];
            }
        }
        (a, y)
    }

    /// Scale `c^2` minimizing the chi-squared of `c^2 X` for fixed `X`.
    pub fn optimal_scale(&self, x: &DMatrix<C64>) -> f64 {
        let m = self.expected(x);
        let (mut num, mut den) = (0.0, 0.0);
        for ((m, n), w) in m.iter().zip(&self.counts).zip(&self.weights) {
            for i in 0..3 {
                num += w[i] * n[i] * m[i];
                den += w[i] * m[i] * m[i];
            }
        }
        if den > 0.0 {
            (num / den).max(0.0)
        } else {
            0.0
        }
    }
}

fn trace_product_re(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_design_reproduces_chi2() {
        use crate::channel::RotationChannel;
        use crate::tomography::CountRecord;
        let records = (0..9)
            .map(|j| CountRecord {
                field: 0.005 * j as f64,
                integration_time: 1.0 + 0.1 * j as f64,
                counts: [30.0 + j as f64, 12.0, 0.0],
                singles: None,
            })
            .collect();
        let model = CountModel::new(&CoincidenceDataset::new(records).unwrap(), &RotationChannel::lossless(37.0)).unwrap();
        let p: Vec<f64> = (0..16).map(|i| (0.7 * i as f64).sin() * 3.0).collect();
        let x = operator_from_params(&p);
        let v = hermitian_coordinates(&x);
        assert!((&hermitian_from_coordinates(&v) - &x).norm() < 1e-12 * x.norm());
        let (a, y) = model.design();
        let q = (&y - &a * &v).norm_squared();
        let direct = model.chi2_of_operator(&x);
        assert!((q - direct).abs() < 1e-9 * direct, "{q} vs {direct}");
    }

    #[test]
    fn params_round_trip() {
        let p: Vec<f64> = (0..16).map(|i| 0.1 * i as f64 - 0.4).collect();
        assert_eq!(params_from_factor(&factor_from_params(&p)), p);
    }
}
