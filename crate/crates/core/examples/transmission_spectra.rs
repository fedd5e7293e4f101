//! Hot-cell D1 transmission around the Rb-85 lines for a few axial fields.

use faraday_noon::atomic::{transmission_spectrum, CellConfig};
use faraday_noon::constants::Isotope;
use faraday_noon::grid::linspace;

fn main() -> faraday_noon::Result<()> {
    let cell = CellConfig {
        temperature_c: 83.0,
        ..CellConfig::default()
    };
    let centroid = Isotope::Rb85.constants().d1_frequency;
    let detunings = linspace(-6e9, 6e9, 1201);
    let probes: Vec<f64> = detunings.iter().map(|d| centroid + d).collect();
    let step = detunings[1] - detunings[0];
    for field_mt in [0.0, 12.0, 24.0, 37.0, 49.0, 58.0] {
        let spectrum = transmission_spectrum(&cell, &probes, field_mt * 1e-3)?;
        let t: Vec<f64> = spectrum.iter().map(|c| c.linear_transmission()).collect();
        let absorbing = t.iter().filter(|v| **v < 0.5).count() as f64 * step;
        let (i, tmin) = t.iter().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
        println!(
            "B = {field_mt:4.0} mT: T < 0.5 over {:6.0} MHz, minimum {tmin:.2e} at {:+6.0} MHz",
            absorbing * 1e-6,
            detunings[i] * 1e-6
        );
    }
    Ok(())
}
