//! Simulated coincidence scan, chi-squared reconstruction and a Fisher
//! information band from the chi-squared region.

use std::f64::consts::FRAC_PI_2;

use faraday_noon::atomic::CellConfig;
use faraday_noon::channel::VaporChannel;
use faraday_noon::constants::noon_probe_frequency;
use faraday_noon::grid::linspace;
use faraday_noon::polarimetry::{make_noon_state, mixing_for_fidelity};
use faraday_noon::tomography::{fi_error_band, reconstruct, simulate_counts, BandOptions, ReconstructOptions};

fn main() -> faraday_noon::Result<()> {
    let channel = VaporChannel::new(CellConfig::default(), noon_probe_frequency());
    let truth = make_noon_state(FRAC_PI_2, mixing_for_fidelity(0.9)?)?;
    let data = simulate_counts(&truth, &channel, &linspace(0.0, 0.06, 20), 3e5, 1.0, 1)?;
    let fit = reconstruct(&data, &channel, &ReconstructOptions::default())?;
    println!("chi2 {:.3} over {} counts", fit.chi2, 3 * data.len());
    println!("fidelity to truth {:.5}", fit.state.fidelity(truth.density())?);
    println!("fitted flux {:.4e} 1/s, NOON phase {:.4}", fit.flux, fit.noon_phase);
    println!("restart spread {:.2e}", fit.identifiability.restart_spread);
    let band = fi_error_band(&fit, &data, &channel, 0.037, 1.0, &BandOptions::default())?;
    println!("FI at 37 mT {:.4e} 1/T^2, band [{:.4e}, {:.4e}]", band.fisher, band.min, band.max);
    Ok(())
}
