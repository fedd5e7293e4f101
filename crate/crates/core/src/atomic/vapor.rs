//! Saturated rubidium vapor density.

use crate::constants::{
    melting_point_kelvin, VaporPressureFit, BOLTZMANN, TORR_IN_PA, ZERO_CELSIUS_K,
};
use crate::{Error, Result};

pub const MIN_TEMPERATURE_C: f64 = 0.0;
pub const MAX_TEMPERATURE_C: f64 = 150.0;

/// Saturated vapor pressure over the solid (below the melting point) or
/// liquid metal, Pa.
pub fn vapor_pressure(temperature_c: f64) -> Result<f64> {
    check_range(temperature_c)?;
    let kelvin = temperature_c + ZERO_CELSIUS_K;
    let fit = if kelvin < melting_point_kelvin() {
        VaporPressureFit::solid()
    } else {
        VaporPressureFit::liquid()
    };
    Ok(10f64.powf(fit.log10_torr(kelvin)) * TORR_IN_PA)
}

/// Total rubidium number density (m^-3) from the ideal gas law.
pub fn vapor_density(temperature_c: f64) -> Result<f64> {
    let p = vapor_pressure(temperature_c)?;
    Ok(p / (BOLTZMANN * (temperature_c + ZERO_CELSIUS_K)))
}

fn check_range(temperature_c: f64) -> Result<()> {
    if !(MIN_TEMPERATURE_C..=MAX_TEMPERATURE_C).contains(&temperature_c) {
        return Err(Error::invalid(format!(
            "temperature {temperature_c} C outside [{MIN_TEMPERATURE_C}, {MAX_TEMPERATURE_C}] C"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_over_operating_range() {
        let mut last = 0.0;
        for k in 0..=140 {
            let t = 20.0 + 0.5 * k as f64;
            let n = vapor_density(t).unwrap();
            assert!(n > last, "{t}");
            last = n;
        }
    }

    #[test]
    fn strong_growth_between_spectra_temperatures() {
        let r = vapor_density(83.0).unwrap() / vapor_density(22.0).unwrap();
        assert!(r > 50.0, "{r}");
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(vapor_density(-1.0).is_err());
        assert!(vapor_density(151.0).is_err());
        assert!(vapor_density(f64::NAN).is_err());
    }

    #[test]
    fn nearly_continuous_at_melting_point() {
        let tm = melting_point_kelvin() - ZERO_CELSIUS_K;
        let below = vapor_pressure(tm - 1e-6).unwrap();
        let above = vapor_pressure(tm + 1e-6).unwrap();
        assert!((below - above).abs() / above < 0.05);
    }
}
