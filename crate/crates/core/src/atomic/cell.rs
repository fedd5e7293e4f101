//! Complex refractive index of the vapor and amplitude transmission of the cell.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lineshape::{doppler_width, voigt_profile};
use super::transitions::{transition_table, Transition};
use super::vapor::vapor_density;
use crate::constants::{Isotope, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY, ZERO_CELSIUS_K};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub isotope: Isotope,
    pub abundance: f64,
}

/// Axial field profile along the beam, parametrized by the center field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FieldProfile {
    /// `B(z) = B_c (1 - drop (2z/L)^2)`.
    Parabolic { drop: f64 },
    Uniform,
}

impl FieldProfile {
    /// Field at fractional position `u = 2z/L` in [-1, 1].
    pub fn at(&self, center: f64, u: f64) -> f64 {
        match *self {
            FieldProfile::Parabolic { drop } => center * (1.0 - drop * u * u),
            FieldProfile::Uniform => center,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    /// Internal length, m.
    pub length: f64,
    pub temperature_c: f64,
    pub species: Vec<Species>,
    pub profile: FieldProfile,
    /// Simpson nodes along the beam (odd, at least 3).
    pub slices: usize,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            length: 0.075,
            temperature_c: 70.0,
            species: Isotope::ALL
                .iter()
                .map(|&isotope| Species {
                    isotope,
                    abundance: isotope.constants().cell_abundance,
                })
                .collect(),
            profile: FieldProfile::Parabolic { drop: 0.15 },
            slices: 51,
        }
    }
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::invalid("cell length must be positive"));
        }
        if self.slices < 3 || self.slices.is_multiple_of(2) {
            return Err(Error::invalid("slices must be odd and at least 3"));
        }
        if let FieldProfile::Parabolic { drop } = self.profile {
            if !(0.0..1.0).contains(&drop) {
                return Err(Error::invalid("field drop fraction must lie in [0, 1)"));
            }
        }
        let mut total = 0.0;
        for (k, s) in self.species.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.abundance) {
                return Err(Error::invalid("abundance must lie in [0, 1]"));
            }
            if self.species[..k].iter().any(|o| o.isotope == s.isotope) {
                return Err(Error::invalid(format!("{} listed twice", s.isotope)));
            }
            total += s.abundance;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::invalid("abundances sum to more than 1"));
        }
        vapor_density(self.temperature_c)?;
        Ok(())
    }

    /// Same cell with one isotope removed and the others left untouched.
    pub fn without(&self, isotope: Isotope) -> CellConfig {
        let mut c = self.clone();
        c.species.retain(|s| s.isotope != isotope);
        c
    }

    pub fn abundance(&self, isotope: Isotope) -> f64 {
        self.species
            .iter()
            .find(|s| s.isotope == isotope)
            .map_or(0.0, |s| s.abundance)
    }
}

/// Complex index n+/n- contributed by one isotope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopeIndex {
    pub isotope: Isotope,
    pub plus: C64,
    pub minus: C64,
}

/// Transition tables of every species at one uniform field.
struct SliceLines {
    field: f64,
    tables: Vec<Vec<Transition>>,
}

impl SliceLines {
    fn new(config: &CellConfig, field: f64) -> Result<Self> {
        let tables = config
            .species
            .iter()
            .map(|s| {
                if s.abundance > 0.0 {
                    transition_table(s.isotope.constants(), field)
                } else {
                    Ok(Vec::new())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SliceLines { field, tables })
    }

    /// Per-isotope (n - 1) for sigma+ and sigma-.
    fn excess(&self, config: &CellConfig, total_density: f64, probe: f64) -> Vec<IsotopeIndex> {
        let kelvin = config.temperature_c + ZERO_CELSIUS_K;
        let mut out = Vec::with_capacity(config.species.len());
        for (s, table) in config.species.iter().zip(&self.tables) {
            let iso = s.isotope.constants();
            let density = total_density * s.abundance;
            let sigma = doppler_width(probe, kelvin, iso.mass);
            // chi = N d^2 / (eps0 hbar) * sum S / (omega_eg - omega - i Gamma/2), in Hz units.
            let prefactor = density * iso.dipole * iso.dipole / (VACUUM_PERMITTIVITY * HBAR * 2.0 * PI);
            let mut plus = C64::new(0.0, 0.0);
            let mut minus = C64::new(0.0, 0.0);
            if density > 0.0 {
                for t in table {
                    let detuning = (iso.d1_frequency - probe) + t.offset;
                    let v = voigt_profile(detuning, sigma, iso.linewidth);
                    plus += v * t.sigma_plus;
                    minus += v * t.sigma_minus;
                }
            }
            if self.field == 0.0 {
                // Sigma+/sigma- symmetry is exact at zero field; avoid summation-order rounding.
                minus = plus;
            }
            out.push(IsotopeIndex {
                isotope: s.isotope,
                plus: 0.5 * prefactor * plus,
                minus: 0.5 * prefactor * minus,
            });
        }
        out
    }
}

fn index_excess(config: &CellConfig, probe: f64, field: f64) -> Result<Vec<IsotopeIndex>> {
    let total_density = vapor_density(config.temperature_c)?;
    Ok(SliceLines::new(config, field)?.excess(config, total_density, probe))
}

/// Complex refractive indices n+ and n- of each isotope at a uniform field.
pub fn complex_index(config: &CellConfig, probe: f64, field: f64) -> Result<Vec<IsotopeIndex>> {
    config.validate()?;
    check_field(field)?;
    Ok(index_excess(config, probe, field)?
        .into_iter()
        .map(|x| IsotopeIndex {
            plus: x.plus + 1.0,
            minus: x.minus + 1.0,
            ..x
        })
        .collect())
}

fn check_field(field: f64) -> Result<()> {
    if !field.is_finite() {
        return Err(Error::invalid("field must be finite"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopeFactor {
    pub isotope: Isotope,
    pub plus: C64,
    pub minus: C64,
}

/// Amplitude transmissions of the cell for sigma+ and sigma- light, with the
/// common vacuum phase removed. `t_plus` is the product of the per-isotope
/// factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferCoefficients {
    pub t_plus: C64,
    pub t_minus: C64,
    pub factors: Vec<IsotopeFactor>,
}

impl TransferCoefficients {
    pub fn from_factors(factors: Vec<IsotopeFactor>) -> Self {
        let t_plus = factors.iter().fold(C64::new(1.0, 0.0), |a, f| a * f.plus);
        let t_minus = factors.iter().fold(C64::new(1.0, 0.0), |a, f| a * f.minus);
        TransferCoefficients {
            t_plus,
            t_minus,
            factors,
        }
    }

    /// Per-isotope factor; an isotope absent from the cell transmits perfectly.
    pub fn factor(&self, isotope: Isotope) -> (C64, C64) {
        self.factors
            .iter()
            .find(|f| f.isotope == isotope)
            .map_or((C64::new(1.0, 0.0), C64::new(1.0, 0.0)), |f| (f.plus, f.minus))
    }

    /// Rotation angle of linear polarization, `arg(t- / t+) / 2`.
    pub fn faraday_angle(&self) -> f64 {
        0.5 * (self.t_minus / self.t_plus).arg()
    }

    /// Same phases with unit magnitudes everywhere.
    pub fn lossless(&self) -> Self {
        let unit = |z: C64| C64::from_polar(1.0, z.arg());
        TransferCoefficients::from_factors(
            self.factors
                .iter()
                .map(|f| IsotopeFactor {
                    isotope: f.isotope,
                    plus: unit(f.plus),
                    minus: unit(f.minus),
                })
                .collect(),
        )
    }

    /// Intensity transmission of a linearly polarized beam.
    pub fn linear_transmission(&self) -> f64 {
        0.5 * (self.t_plus.norm_sqr() + self.t_minus.norm_sqr())
    }
}

/// Transmission of the cell with the field profile integrated along the beam.
pub fn cell_transmission(config: &CellConfig, probe: f64, center_field: f64) -> Result<TransferCoefficients> {
    Ok(transmission_spectrum(config, &[probe], center_field)?.remove(0))
}

/// [`cell_transmission`] at many probe frequencies for one center field.
/// Level structure is computed once per slice and shared across probes.
pub fn transmission_spectrum(config: &CellConfig, probes: &[f64], center_field: f64) -> Result<Vec<TransferCoefficients>> {
    config.validate()?;
    check_field(center_field)?;
    if probes.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::invalid("probe frequencies must be positive"));
    }
    let n = config.slices;
    let h = config.length / (n - 1) as f64;
    let mid = n / 2;
    let total_density = vapor_density(config.temperature_c)?;

    // B(z) is even in z, so nodes k and n-1-k share the same index.
    let slices = (0..=mid)
        .map(|k| {
            let u = (2.0 * k as f64 / (n - 1) as f64) - 1.0;
            let w = simpson_weight(k, n) + if k != mid { simpson_weight(n - 1 - k, n) } else { 0.0 };
            Ok((w, SliceLines::new(config, config.profile.at(center_field, u))?))
        })
        .collect::<Result<Vec<_>>>()?;

    probes
        .par_iter()
        .map(|&probe| {
            let k0 = 2.0 * PI * probe / SPEED_OF_LIGHT;
            let mut sums = vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); config.species.len()];
            for (w, lines) in &slices {
                for (acc, x) in sums.iter_mut().zip(lines.excess(config, total_density, probe)) {
                    acc.0 += x.plus * *w;
                    acc.1 += x.minus * *w;
                }
            }
            let factors = config
                .species
                .iter()
                .zip(sums)
                .map(|(s, (p, m))| IsotopeFactor {
                    isotope: s.isotope,
                    plus: (C64::i() * k0 * p * (h / 3.0)).exp(),
                    minus: (C64::i() * k0 * m * (h / 3.0)).exp(),
                })
                .collect();
            let t = TransferCoefficients::from_factors(factors);
            if !(t.t_plus.is_finite() && t.t_minus.is_finite()) {
                return Err(Error::NonFinite("cell transmission".into()));
            }
            Ok(t)
        })
        .collect()
}

fn simpson_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n - 1 {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}
