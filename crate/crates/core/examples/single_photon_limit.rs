//! Best single-photon Fisher information at one field, over input
//! polarizations and projective analyzers.

use faraday_noon::atomic::CellConfig;
use faraday_noon::channel::VaporChannel;
use faraday_noon::constants::noon_probe_frequency;
use faraday_noon::metrology::{sql_optimize, SqlObjective, SqlOptions};

fn main() -> faraday_noon::Result<()> {
    let channel = VaporChannel::new(CellConfig::default(), noon_probe_frequency());
    for objective in [SqlObjective::PerPhoton, SqlObjective::PerScatter] {
        let r = sql_optimize(&channel, 0.037, objective, &SqlOptions::default())?;
        println!(
            "{objective:?}: FI {:.4e} 1/T^2, scattering {:.4}, input angles {:.3?}, analyzer angles {:.3?}, {} restarts",
            r.fisher,
            r.scattering,
            r.input,
            r.analyzer,
            r.restarts.len()
        );
    }
    Ok(())
}
