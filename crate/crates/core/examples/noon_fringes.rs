//! Single-photon and NOON coincidence fringes through the vapor cell: the
//! pair fringe oscillates twice as fast as the single-photon one.

use std::f64::consts::FRAC_PI_2;

use faraday_noon::atomic::CellConfig;
use faraday_noon::channel::VaporChannel;
use faraday_noon::constants::noon_probe_frequency;
use faraday_noon::grid::linspace;
use faraday_noon::polarimetry::{analyze_fringe, make_noon_state, pair_signal, singles_signal, SinglePhotonState};

fn main() -> faraday_noon::Result<()> {
    let channel = VaporChannel::new(CellConfig::default(), noon_probe_frequency());
    let grid = linspace(0.0, 0.05, 201);
    let noon = make_noon_state(FRAC_PI_2, 1.0)?;
    let singles = analyze_fringe(singles_signal(&SinglePhotonState::linear(0.0), &channel), &grid)?;
    let hh = analyze_fringe(pair_signal(&noon, &channel, 0), &grid)?;
    let vv = analyze_fringe(pair_signal(&noon, &channel, 2), &grid)?;
    let mt = |p: Option<f64>| p.map_or("none".into(), |p| format!("{:.2} mT", p * 1e3));
    println!("singles period {}, visibility {:.3}", mt(singles.period()), singles.visibility());
    println!("HH period {}, visibility {:.3}", mt(hh.period()), hh.visibility());
    println!("VV period {}, visibility {:.3}", mt(vv.period()), vv.visibility());
    Ok(())
}
