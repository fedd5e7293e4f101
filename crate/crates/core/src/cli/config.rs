//! Run configuration in boundary units (mT, °C, mm, MHz) and its conversion to SI.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::atomic::{vapor_density, CellConfig, FieldProfile, Species};
use crate::channel::VaporChannel;
use crate::constants::{noon_probe_frequency, Isotope};
use crate::grid::{linspace, validate_grid};
use crate::metrology::{AdvantageOptions, EfficiencyModel, SqlOptions};
use crate::polarimetry::{make_noon_state, mixing_for_fidelity, SinglePhotonState, TwoPhotonState};
use crate::tomography::{BandOptions, ReconstructOptions};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the single-photon restarts, simulated counts and reconstruction starts.
    pub seed: u64,
    pub out: PathBuf,
    pub cell: CellSection,
    pub probe: ProbeSection,
    pub grid: GridSection,
    pub state: StateSection,
    pub efficiency: EfficiencyModel,
    pub fisher: FisherSection,
    pub sql: SqlSection,
    pub advantage: AdvantageSection,
    pub spectra: SpectraSection,
    pub tomo: TomoSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub length_mm: f64,
    pub temperature_c: f64,
    pub rb85_fraction: f64,
    pub rb87_fraction: f64,
    /// Fractional field drop from the center to the faces; 0 gives a uniform field.
    pub field_drop: f64,
    pub slices: usize,
    pub lossless: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// Offset from the Rb-87 D1 F=2 -> F'=1 line.
    pub offset_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub start_mt: f64,
    pub stop_mt: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSection {
    /// NOON phase, rad. Absent: the phase maximizing pair Fisher information at the advantage field.
    pub noon_phase: Option<f64>,
    /// Fidelity of the NOON/symmetric-mixture pair state.
    pub fidelity: f64,
    /// Bloch angles of the singles reference photon in the circular basis; default H.
    pub single_a: f64,
    pub single_b: f64,
    /// Pair state JSON replacing the NOON model.
    pub file: Option<PathBuf>,
    /// Pair flux at the cell input, 1/s.
    pub pair_flux: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisherSection {
    pub step_ut: f64,
    pub include_no_click: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqlSection {
    pub starts: usize,
    pub tolerance: f64,
    pub max_evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvantageSection {
    pub field_mt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraSection {
    pub temperatures_c: Vec<f64>,
    pub fields_mt: Vec<f64>,
    /// Detuning from the Rb-85 D1 centroid.
    pub detuning_start_mhz: f64,
    pub detuning_stop_mhz: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoSection {
    pub start_mt: f64,
    pub stop_mt: f64,
    pub points: usize,
    pub integration_time_s: f64,
    pub starts: usize,
    pub max_iterations: usize,
    pub band_field_mt: f64,
    pub band_delta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out: PathBuf::from("out"),
            cell: CellSection::default(),
            probe: ProbeSection::default(),
            grid: GridSection::default(),
            state: StateSection::default(),
            efficiency: EfficiencyModel::default(),
            fisher: FisherSection::default(),
            sql: SqlSection::default(),
            advantage: AdvantageSection::default(),
            spectra: SpectraSection::default(),
            tomo: TomoSection::default(),
        }
    }
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection {
            length_mm: 75.0,
            temperature_c: 70.0,
            rb85_fraction: Isotope::Rb85.constants().cell_abundance,
            rb87_fraction: Isotope::Rb87.constants().cell_abundance,
            field_drop: 0.15,
            slices: 51,
            lossless: false,
        }
    }
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { offset_mhz: 0.0 }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            start_mt: 0.0,
            stop_mt: 50.0,
            points: 201,
        }
    }
}

impl Default for StateSection {
    fn default() -> Self {
        StateSection {
            noon_phase: None,
            fidelity: 0.9,
            single_a: std::f64::consts::FRAC_PI_2,
            single_b: 0.0,
            file: None,
            pair_flux: 3.0e5,
        }
    }
}

impl Default for FisherSection {
    fn default() -> Self {
        FisherSection {
            step_ut: 10.0,
            include_no_click: false,
        }
    }
}

impl Default for SqlSection {
    fn default() -> Self {
        let d = SqlOptions::default();
        SqlSection {
            starts: d.starts,
            tolerance: d.tolerance,
            max_evaluations: d.max_evaluations,
        }
    }
}

impl Default for AdvantageSection {
    fn default() -> Self {
        AdvantageSection { field_mt: 37.0 }
    }
}

impl Default for SpectraSection {
    fn default() -> Self {
        SpectraSection {
            temperatures_c: vec![22.0, 53.0, 83.0],
            fields_mt: vec![0.0, 12.0, 24.0, 37.0, 49.0, 58.0],
            detuning_start_mhz: -4500.0,
            detuning_stop_mhz: 5000.0,
            points: 951,
        }
    }
}

impl Default for TomoSection {
    fn default() -> Self {
        let r = ReconstructOptions::default();
        TomoSection {
            start_mt: 0.0,
            stop_mt: 60.0,
            points: 20,
            integration_time_s: 1.0,
            starts: r.starts,
            max_iterations: r.max_iterations,
            band_field_mt: 37.0,
            band_delta: 1.0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite")))
    }
}

fn range_grid(name: &str, start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidInput(format!("{name} needs at least 2 points")));
    }
    finite(name, start)?;
    finite(name, stop)?;
    if stop.is_nan() || start.is_nan() || stop <= start {
        return Err(Error::InvalidInput(format!("{name} must increase ({start} to {stop})")));
    }
    let g = linspace(start, stop, points);
    validate_grid(&g)?;
    Ok(g)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("config serialization: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.cell_config()?.validate()?;
        finite("probe offset", self.probe.offset_mhz)?;
        self.grid()?;
        self.tomo_grid()?;
        let s = &self.state;
        if !(1.0 / 3.0..=1.0).contains(&s.fidelity) {
            return Err(Error::InvalidInput(format!("fidelity {} must lie in [1/3, 1]", s.fidelity)));
        }
        if let Some(phi) = s.noon_phase {
            finite("noon phase", phi)?;
        }
        finite("single_a", s.single_a)?;
        finite("single_b", s.single_b)?;
        self.efficiency.validate()?;
        positive("fisher step", self.fisher.step_ut)?;
        if self.sql.starts == 0 || self.sql.max_evaluations == 0 {
            return Err(Error::invalid("sql starts and evaluations must be positive"));
        }
        positive("sql tolerance", self.sql.tolerance)?;
        finite("advantage field", self.advantage.field_mt)?;
        let sp = &self.spectra;
        if sp.temperatures_c.is_empty() || sp.fields_mt.is_empty() {
            return Err(Error::invalid("spectra need at least one temperature and one field"));
        }
        for &t in &sp.temperatures_c {
            vapor_density(t)?;
        }
        for &b in &sp.fields_mt {
            finite("spectra field", b)?;
        }
        self.detunings()?;
        let t = &self.tomo;
        positive("pair flux", s.pair_flux)?;
        positive("integration time", t.integration_time_s)?;
        if t.starts == 0 || t.max_iterations == 0 {
            return Err(Error::invalid("tomography starts and iterations must be positive"));
        }
        finite("band field", t.band_field_mt)?;
        if !(t.band_delta.is_finite() && t.band_delta >= 0.0) {
            return Err(Error::invalid("band delta must be non-negative"));
        }
        Ok(())
    }

    pub fn cell_config(&self) -> Result<CellConfig> {
        let c = &self.cell;
        positive("cell length", c.length_mm)?;
        finite("field drop", c.field_drop)?;
        let mut species = vec![Species {
            isotope: Isotope::Rb85,
            abundance: c.rb85_fraction,
        }];
        if c.rb87_fraction > 0.0 {
            species.push(Species {
                isotope: Isotope::Rb87,
                abundance: c.rb87_fraction,
            });
        }
        let cell = CellConfig {
            length: c.length_mm * 1e-3,
            temperature_c: c.temperature_c,
            species,
            profile: if c.field_drop == 0.0 {
                FieldProfile::Uniform
            } else {
                FieldProfile::Parabolic { drop: c.field_drop }
            },
            slices: c.slices,
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Probe frequency, Hz.
    pub fn probe_frequency(&self) -> f64 {
        noon_probe_frequency() + self.probe.offset_mhz * 1e6
    }

    pub fn channel(&self) -> Result<VaporChannel> {
        Ok(VaporChannel::new(self.cell_config()?, self.probe_frequency()).lossless(self.cell.lossless))
    }

    /// Main field grid, tesla.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = &self.grid;
        Ok(range_grid("field grid", g.start_mt, g.stop_mt, g.points)?
            .into_iter()
            .map(|b| b * 1e-3)
            .collect())
    }

    /// Tomography field grid, tesla.
    pub fn tomo_grid(&self) -> Result<Vec<f64>> {
        let t = &self.tomo;
        Ok(range_grid("tomography grid", t.start_mt, t.stop_mt, t.points)?
            .into_iter()
            .map(|b| b * 1e-3)
            .collect())
    }

    /// Spectra probe detunings from the Rb-85 D1 centroid, Hz.
    pub fn detunings(&self) -> Result<Vec<f64>> {
        let s = &self.spectra;
        Ok(range_grid("detuning range", s.detuning_start_mhz, s.detuning_stop_mhz, s.points)?
            .into_iter()
            .map(|d| d * 1e6)
            .collect())
    }

    /// Finite-difference step, tesla.
    pub fn step(&self) -> f64 {
        self.fisher.step_ut * 1e-6
    }

    pub fn advantage_field(&self) -> f64 {
        self.advantage.field_mt * 1e-3
    }

    pub fn band_field(&self) -> f64 {
        self.tomo.band_field_mt * 1e-3
    }

    pub fn sql_options(&self) -> SqlOptions {
        SqlOptions {
            starts: self.sql.starts,
            seed: self.seed,
            step: self.step(),
            tolerance: self.sql.tolerance,
            max_evaluations: self.sql.max_evaluations,
            include_no_click: self.fisher.include_no_click,
        }
    }

    pub fn advantage_options(&self) -> AdvantageOptions {
        AdvantageOptions {
            step: self.step(),
            include_no_click: self.fisher.include_no_click,
            sql: self.sql_options(),
            efficiency: self.efficiency,
        }
    }

    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            starts: self.tomo.starts,
            seed: self.seed.wrapping_add(1),
            max_iterations: self.tomo.max_iterations,
        }
    }

    pub fn band_options(&self) -> BandOptions {
        BandOptions::default()
    }

    pub fn single_photon(&self) -> Result<SinglePhotonState> {
        SinglePhotonState::from_angles(self.state.single_a, self.state.single_b)
    }

    /// NOON mixing weight for the configured fidelity.
    pub fn mixing(&self) -> Result<f64> {
        mixing_for_fidelity(self.state.fidelity)
    }

    /// Pair state from the state file, or the NOON model with the configured
    /// or optimized phase. Returns the phase used when the model applies.
    pub fn pair_state(&self) -> Result<(TwoPhotonState, Option<f64>)> {
        if let Some(path) = &self.state.file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let state: TwoPhotonState = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                message: format!("{}: {e}", path.display()),
            })?;
            return Ok((state, None));
        }
        let p = self.mixing()?;
        let phi = match self.state.noon_phase {
            Some(phi) => phi,
            None => crate::metrology::optimize_noon_phase(
                &self.channel()?,
                self.advantage_field(),
                p,
                self.step(),
                self.fisher.include_no_click,
            )?,
        };
        Ok((make_noon_state(phi, p)?, Some(phi)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unit_conversion() {
        let mut c = RunConfig {
            grid: GridSection {
                start_mt: 0.0,
                stop_mt: 50.0,
                points: 6,
            },
            ..RunConfig::default()
        };
        c.advantage.field_mt = 37.0;
        c.probe.offset_mhz = 2.5;
        let g = c.grid().unwrap();
        assert_eq!(g.len(), 6);
        assert!((g[1] - 0.01).abs() < 1e-15 && g[5] == 0.05);
        assert!((c.advantage_field() - 0.037).abs() < 1e-15);
        assert!((c.step() - 1e-5).abs() < 1e-20);
        assert!((c.probe_frequency() - noon_probe_frequency() - 2.5e6).abs() < 1e-3);
        let cell = c.cell_config().unwrap();
        assert!((cell.length - 0.075).abs() < 1e-15);
        assert_eq!(cell.temperature_c, 70.0);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml("seed = 9\n[cell]\ntemperature_c = 53.0\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.cell.temperature_c, 53.0);
        assert_eq!(c.grid, GridSection::default());
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(matches!(RunConfig::from_toml("[cell]\nbogus = 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(RunConfig::from_toml("[grid]\nstart_mt = 5.0\nstop_mt = 1.0\n").is_err());
        assert!(RunConfig::from_toml("[cell]\ntemperature_c = 400.0\n").is_err());
        assert!(RunConfig::from_toml("[state]\nfidelity = 0.2\n").is_err());
        assert!(RunConfig::from_toml("[cell]\nrb85_fraction = 0.9\nrb87_fraction = 0.2\n").is_err());
    }

    #[test]
    fn uniform_profile_and_pure_rb85() {
        let mut c = RunConfig::default();
        c.cell.field_drop = 0.0;
        c.cell.rb87_fraction = 0.0;
        let cell = c.cell_config().unwrap();
        assert_eq!(cell.profile, FieldProfile::Uniform);
        assert_eq!(cell.species.len(), 1);
    }
}
