//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use faraday_noon::constants::{IsotopeConstants, BOHR_MAGNETON_HZ_PER_T};
use num_complex::Complex64 as C64;

/// Breit-Rabi energies (Hz, centroid removed) of a J=1/2 ground manifold, sorted ascending.
pub fn breit_rabi(iso: &IsotopeConstants, field: f64) -> Vec<f64> {
    let i = iso.nuclear_spin;
    let dim = 2.0 * i + 1.0;
    let dhfs = iso.a_hfs_ground * (i + 0.5);
    let mu = BOHR_MAGNETON_HZ_PER_T * field;
    let x = (iso.g_j_ground - iso.g_i) * mu / dhfs;
    let mut out = Vec::new();
    let f_max = i + 0.5;
    let mut m = -f_max;
    while m <= f_max + 1e-9 {
        let base = -dhfs / (2.0 * dim) + iso.g_i * mu * m;
        if (m.abs() - f_max).abs() < 1e-9 {
            // Stretched states: the root is (1 + sign(m) x), taken without absolute value.
            let s = m.signum();
            out.push(base + 0.5 * dhfs * (1.0 + s * x));
        } else {
            let root = (1.0 + 4.0 * m * x / dim + x * x).sqrt();
            out.push(base + 0.5 * dhfs * root);
            out.push(base - 0.5 * dhfs * root);
        }
        m += 1.0;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Zero-field hyperfine energy `A/2 [F(F+1) - I(I+1) - J(J+1)]` with J = 1/2.
pub fn hyperfine_energy(a: f64, i: f64, f: f64) -> f64 {
    0.5 * a * (f * (f + 1.0) - i * (i + 1.0) - 0.75)
}

fn simpson<F: Fn(f64) -> C64>(f: &F, a: f64, fa: C64, b: f64, fb: C64) -> (f64, C64, C64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    fa: C64,
    b: f64,
    fb: C64,
    m: f64,
    fm: C64,
    whole: C64,
    tol: f64,
    depth: u32,
) -> C64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
pub fn integrate<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adaptive(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

/// Gaussian (standard deviation `sigma`) average of the Lorentzian `1 / (delta - u - i gamma_fwhm / 2)`,
/// by direct quadrature with breakpoints around the Lorentzian core.
pub fn voigt_by_convolution(delta: f64, sigma: f64, gamma_fwhm: f64) -> C64 {
    let g = 0.5 * gamma_fwhm;
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let f = |u: f64| C64::new(norm * (-0.5 * u * u / (sigma * sigma)).exp(), 0.0) / C64::new(delta - u, -g);
    let lim = 14.0 * sigma;
    let mut cuts = vec![-lim, lim];
    for k in [-50.0, -5.0, -0.5, 0.0, 0.5, 5.0, 50.0] {
        let c = delta + k * g;
        if c > -lim && c < lim {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let scale = 1.0 / sigma;
    cuts.windows(2)
        .map(|w| integrate(&f, w[0], w[1], 1e-13 * scale))
        .sum()
}

/// Saturated Rb density (m^-3) from the Nesmeyanov vapor-pressure fits, evaluated from scratch.
pub fn nesmeyanov_density(celsius: f64) -> f64 {
    let t = celsius + 273.15;
    let log10_torr = if t < 312.46 {
        -94.04826 - 1961.258 / t - 0.03771687 * t + 42.57526 * t.log10()
    } else {
        15.88253 - 4529.635 / t + 0.00058663 * t - 2.99138 * t.log10()
    };
    let pascal = 10f64.powf(log10_torr) * 101_325.0 / 760.0;
    pascal / (1.380_649e-23 * t)
}

/// Relative error `|a - b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
