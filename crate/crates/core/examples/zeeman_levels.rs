//! Ground-state hyperfine levels of both isotopes as the field grows.

use faraday_noon::atomic::{diagonalize_levels, Manifold};
use faraday_noon::constants::Isotope;
use faraday_noon::grid::linspace;

fn main() -> faraday_noon::Result<()> {
    for iso in Isotope::ALL {
        println!("Rb-{} ground manifold, energies in GHz", iso.mass_number());
        for b in linspace(0.0, 0.1, 6) {
            let levels = diagonalize_levels(iso.constants(), Manifold::Ground, b)?;
            let e: Vec<String> = levels.energies().iter().map(|e| format!("{:+.3}", e * 1e-9)).collect();
            println!("  B = {:5.1} mT: {}", b * 1e3, e.join(" "));
        }
    }
    Ok(())
}
