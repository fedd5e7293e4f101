//! Complex Voigt lineshape through the Faddeeva function.
//!
//! `w(z) = exp(-z^2) erfc(-iz)` is evaluated in the upper half plane with
//! Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1497, 1994),
//! `w(z) ~ 2 p(Z) / (L - iz)^2 + 1 / (sqrt(pi) (L - iz))` with
//! `Z = (L + iz)/(L - iz)`. The lower half plane follows from
//! `w(z) = 2 exp(-z^2) - w(-z)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::constants::{BOLTZMANN, SPEED_OF_LIGHT};

const WEIDEMAN_TERMS: usize = 40;

struct Weideman {
    l: f64,
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // f(t_k) on the mapped grid, k = -m+1 .. m-1
        let samples: Vec<(f64, f64)> = ((1 - m as i64)..(m as i64))
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (theta / 2.0).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let coeffs = (1..=n)
            .map(|j| {
                samples
                    .iter()
                    .map(|(k, f)| f * (PI * j as f64 * k / m as f64).cos())
                    .sum::<f64>()
                    / (2 * m) as f64
            })
            .collect();
        Weideman { l, coeffs }
    })
}

/// Faddeeva function `w(z)` for any complex `z`.
pub fn faddeeva(z: C64) -> C64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - faddeeva(-z);
    }
    let w = weideman();
    let iz = C64::i() * z;
    let denom = w.l - iz;
    let big_z = (w.l + iz) / denom;
    // Horner over a_n Z^(n-1), highest order first.
    let p = w
        .coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &a| acc * big_z + a);
    2.0 * p / (denom * denom) + 1.0 / (PI.sqrt() * denom)
}

/// Complex Voigt lineshape.
///
/// `detuning` is the transition frequency minus the probe frequency (Hz),
/// `doppler_width` the Gaussian standard deviation of the Doppler shifts (Hz)
/// and `natural_width` the Lorentzian FWHM (Hz). The result is the Gaussian
/// average of `1 / (detuning - i natural_width / 2)`, so its imaginary part
/// is the absorptive profile with unit-free area `pi` for any widths, and the
/// real part is the dispersive profile (positive for a probe below resonance).
pub fn voigt_profile(detuning: f64, doppler_width: f64, natural_width: f64) -> C64 {
    let gamma = 0.5 * natural_width;
    if doppler_width <= 0.0 {
        return 1.0 / C64::new(detuning, -gamma);
    }
    let scale = doppler_width * 2f64.sqrt();
    let z = C64::new(-detuning, gamma) / scale;
    C64::i() * (PI / 2.0).sqrt() * faddeeva(z) / doppler_width
}

/// Doppler standard deviation (Hz) for atoms of `mass` (kg) at `kelvin`,
/// probed at `frequency` (Hz).
pub fn doppler_width(frequency: f64, kelvin: f64, mass: f64) -> f64 {
    frequency / SPEED_OF_LIGHT * (BOLTZMANN * kelvin / mass).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faddeeva_reference_values() {
        // w(iy) = exp(y^2) erfc(y); erfc(1) = 0.157299207050285
        let w = faddeeva(C64::new(0.0, 1.0));
        assert!((w.re - 1f64.exp() * 0.157_299_207_050_285_1).abs() < 1e-13);
        assert!(w.im.abs() < 1e-14);
        // w(0) = 1
        assert!((faddeeva(C64::new(0.0, 0.0)) - 1.0).norm() < 1e-13);
        // On the real axis Re w = exp(-x^2).
        for x in [0.3, 1.0, 2.5, 4.0] {
            let w = faddeeva(C64::new(x, 0.0));
            assert!((w.re - (-x * x).exp()).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn faddeeva_large_argument_asymptote() {
        let z = C64::new(40.0, 3.0);
        let asym = C64::i() / (PI.sqrt() * z) * (1.0 + 1.0 / (2.0 * z * z) + 3.0 / (4.0 * z.powi(4)));
        assert!((faddeeva(z) - asym).norm() / asym.norm() < 1e-8);
    }

    #[test]
    fn zero_doppler_is_lorentzian() {
        let v = voigt_profile(3.0e6, 0.0, 5.75e6);
        let l = 1.0 / C64::new(3.0e6, -2.875e6);
        assert!((v - l).norm() < 1e-20);
    }

    #[test]
    fn small_doppler_approaches_lorentzian() {
        let v = voigt_profile(3.0e6, 1.0, 5.75e6);
        let l = 1.0 / C64::new(3.0e6, -2.875e6);
        assert!((v - l).norm() / l.norm() < 1e-6);
    }

    #[test]
    fn dispersion_vanishes_on_resonance() {
        let v = voigt_profile(0.0, 230e6, 5.75e6);
        assert!(v.re.abs() < 1e-15 * v.im.abs());
        assert!(v.im > 0.0);
    }

    #[test]
    fn dispersion_is_odd_absorption_even() {
        let a = voigt_profile(170e6, 230e6, 5.75e6);
        let b = voigt_profile(-170e6, 230e6, 5.75e6);
        assert!((a.re + b.re).abs() < 1e-12 * a.norm());
        assert!((a.im - b.im).abs() < 1e-12 * a.norm());
    }

    #[test]
    fn rb85_doppler_width_at_70c() {
        let c = crate::constants::Isotope::Rb85.constants();
        let s = doppler_width(c.d1_frequency, 343.15, c.mass);
        assert!((s - 230.5e6).abs() < 1e6, "{s}");
    }
}
