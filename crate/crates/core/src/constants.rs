//! Physical constants and the rubidium data table.
//!
//! Universal constants are CODATA 2018 exact or recommended values. Isotope
//! data live in `data/rb_constants.toml`, which is compiled into the crate and
//! parsed once on first use.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Bohr magneton divided by Planck's constant, Hz/T.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 1.399_624_493_61e10;
pub const TORR_IN_PA: f64 = 101_325.0 / 760.0;
pub const ZERO_CELSIUS_K: f64 = 273.15;

/// Raw text of the shipped constants table.
pub const CONSTANTS_TABLE: &str = include_str!("../data/rb_constants.toml");

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct TableEntry {
    pub value: f64,
    pub unit: String,
    pub source: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ConstantsTable {
    pub version: String,
    pub entries: BTreeMap<String, TableEntry>,
}

impl ConstantsTable {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// The table compiled into the crate.
    pub fn shipped() -> &'static ConstantsTable {
        static TABLE: OnceLock<ConstantsTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            ConstantsTable::parse(CONSTANTS_TABLE).expect("shipped constants table is valid TOML")
        })
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.value)
    }

    fn require(&self, key: &str) -> f64 {
        self.value(key)
            .unwrap_or_else(|| panic!("constants table is missing `{key}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Isotope {
    #[serde(rename = "85")]
    Rb85,
    #[serde(rename = "87")]
    Rb87,
}

impl Isotope {
    pub const ALL: [Isotope; 2] = [Isotope::Rb85, Isotope::Rb87];

    pub fn mass_number(self) -> u32 {
        match self {
            Isotope::Rb85 => 85,
            Isotope::Rb87 => 87,
        }
    }

    fn key(self) -> &'static str {
        match self {
            Isotope::Rb85 => "rb85",
            Isotope::Rb87 => "rb87",
        }
    }

    pub fn constants(self) -> &'static IsotopeConstants {
        static RB85: OnceLock<IsotopeConstants> = OnceLock::new();
        static RB87: OnceLock<IsotopeConstants> = OnceLock::new();
        let cell = match self {
            Isotope::Rb85 => &RB85,
            Isotope::Rb87 => &RB87,
        };
        cell.get_or_init(|| IsotopeConstants::from_table(self, ConstantsTable::shipped()))
    }
}

impl fmt::Display for Isotope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rb{}", self.mass_number())
    }
}

/// Fixed parameters of one rubidium isotope on the D1 line.
///
/// Frequencies are in Hz; the hyperfine coefficients multiply `J.I` so that
/// `h * a_hfs` is the energy scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopeConstants {
    pub isotope: Isotope,
    pub nuclear_spin: f64,
    pub g_j_ground: f64,
    pub g_j_excited: f64,
    pub g_i: f64,
    pub a_hfs_ground: f64,
    pub a_hfs_excited: f64,
    pub d1_frequency: f64,
    /// Natural linewidth Gamma/2pi (FWHM), Hz.
    pub linewidth: f64,
    pub mass: f64,
    /// Reduced dipole matrix element <J=1/2||er||J'=1/2>, C*m.
    pub dipole: f64,
    /// Default fractional abundance in the probed cell.
    pub cell_abundance: f64,
}

impl IsotopeConstants {
    pub fn from_table(isotope: Isotope, table: &ConstantsTable) -> Self {
        let k = |name: &str| table.require(&format!("{}.{name}", isotope.key()));
        let constants = IsotopeConstants {
            isotope,
            nuclear_spin: k("nuclear_spin"),
            g_j_ground: k("g_j_ground"),
            g_j_excited: k("g_j_excited"),
            g_i: k("g_i"),
            a_hfs_ground: k("a_hfs_ground"),
            a_hfs_excited: k("a_hfs_excited"),
            d1_frequency: k("d1_frequency"),
            linewidth: k("d1_linewidth"),
            mass: k("mass"),
            dipole: k("d1_dipole"),
            cell_abundance: k("cell_abundance"),
        };
        debug_assert!(constants.validate().is_ok());
        constants
    }

    pub fn validate(&self) -> crate::Result<()> {
        let two_i = 2.0 * self.nuclear_spin;
        if two_i < 0.0 || (two_i - two_i.round()).abs() > 1e-12 {
            return Err(crate::Error::invalid("nuclear spin must be a non-negative half-integer"));
        }
        let positive = [
            self.d1_frequency,
            self.linewidth,
            self.mass,
            self.dipole,
            self.a_hfs_ground.abs(),
        ];
        if positive.iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(crate::Error::invalid("frequencies, linewidth and mass must be positive"));
        }
        Ok(())
    }

    /// Number of nuclear Zeeman sublevels, 2I + 1.
    pub fn nuclear_multiplicity(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 1
    }

    /// Zero-field hyperfine energy of level F in a J = 1/2 manifold, relative
    /// to the manifold centroid (Hz).
    pub fn hyperfine_shift(&self, a_hfs: f64, f: f64) -> f64 {
        let i = self.nuclear_spin;
        let j = 0.5;
        0.5 * a_hfs * (f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0))
    }

    /// Zero-field D1 transition frequency F -> F' (Hz).
    pub fn d1_line(&self, f_ground: f64, f_excited: f64) -> f64 {
        self.d1_frequency + self.hyperfine_shift(self.a_hfs_excited, f_excited)
            - self.hyperfine_shift(self.a_hfs_ground, f_ground)
    }
}

/// Coefficients of the rubidium vapor-pressure fits,
/// `log10(P/torr) = a + b/T + c*T + d*log10(T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaporPressureFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl VaporPressureFit {
    pub fn solid() -> Self {
        Self::load("vapor.solid")
    }

    pub fn liquid() -> Self {
        Self::load("vapor.liquid")
    }

    fn load(prefix: &str) -> Self {
        let t = ConstantsTable::shipped();
        let k = |c: &str| t.require(&format!("{prefix}.{c}"));
        VaporPressureFit {
            a: k("a"),
            b: k("b"),
            c: k("c"),
            d: k("d"),
        }
    }

    pub fn log10_torr(&self, kelvin: f64) -> f64 {
        self.a + self.b / kelvin + self.c * kelvin + self.d * kelvin.log10()
    }
}

pub fn melting_point_kelvin() -> f64 {
    ConstantsTable::shipped().require("vapor.melting_point")
}

/// Probe frequency of the photon pairs: the Rb-87 D1 F=2 -> F'=1 line at zero field.
pub fn noon_probe_frequency() -> f64 {
    Isotope::Rb87.constants().d1_line(2.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_pins_rb85_values() {
        let c = Isotope::Rb85.constants();
        assert_eq!(c.nuclear_spin, 2.5);
        assert_eq!(c.a_hfs_ground, 1.0119108130e9);
        assert_eq!(c.a_hfs_excited, 120.640e6);
        assert_eq!(c.d1_frequency, 377.107385690e12);
        assert_eq!(c.g_i, -0.00029364000);
        assert_eq!(c.cell_abundance, 0.995);
        assert_eq!(c.nuclear_multiplicity(), 6);
    }

    #[test]
    fn table_pins_rb87_values() {
        let c = Isotope::Rb87.constants();
        assert_eq!(c.nuclear_spin, 1.5);
        assert_eq!(c.a_hfs_ground, 3.417341305452145e9);
        assert_eq!(c.a_hfs_excited, 408.328e6);
        assert_eq!(c.d1_frequency, 377.107463380e12);
        assert_eq!(c.g_i, -0.0009951414);
        assert_eq!(c.cell_abundance, 0.005);
    }

    #[test]
    fn every_entry_carries_a_source() {
        let t = ConstantsTable::shipped();
        assert!(!t.version.is_empty());
        for (key, entry) in &t.entries {
            assert!(!entry.source.trim().is_empty(), "{key}");
            assert!(entry.value.is_finite(), "{key}");
        }
    }

    #[test]
    fn abundances_sum_to_one() {
        let s: f64 = Isotope::ALL.iter().map(|i| i.constants().cell_abundance).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ground_splittings_match_known_values() {
        let rb85 = Isotope::Rb85.constants();
        let split85 = rb85.hyperfine_shift(rb85.a_hfs_ground, 3.0)
            - rb85.hyperfine_shift(rb85.a_hfs_ground, 2.0);
        assert!((split85 - 3.035_732_439e9).abs() < 1.0);
        let rb87 = Isotope::Rb87.constants();
        let split87 = rb87.hyperfine_shift(rb87.a_hfs_ground, 2.0)
            - rb87.hyperfine_shift(rb87.a_hfs_ground, 1.0);
        assert!((split87 - 6.834_682_610_904e9).abs() < 1.0);
    }

    #[test]
    fn decay_rate_consistent_with_dipole() {
        // Gamma = omega^3 d^2 / (3 pi eps0 hbar c^3) for J = J' = 1/2.
        for iso in Isotope::ALL {
            let c = iso.constants();
            let w = 2.0 * std::f64::consts::PI * c.d1_frequency;
            let gamma = w.powi(3) * c.dipole.powi(2)
                / (3.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR * SPEED_OF_LIGHT.powi(3));
            let rel = (gamma / (2.0 * std::f64::consts::PI) - c.linewidth).abs() / c.linewidth;
            assert!(rel < 2e-3, "{iso}: {rel}");
        }
    }
}
