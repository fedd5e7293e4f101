//! Field-estimation Fisher information of a mixed NOON state along a field scan.

use faraday_noon::atomic::CellConfig;
use faraday_noon::channel::VaporChannel;
use faraday_noon::constants::noon_probe_frequency;
use faraday_noon::grid::linspace;
use faraday_noon::metrology::{fisher_curve, DEFAULT_STEP};
use faraday_noon::polarimetry::{make_noon_state, mixing_for_fidelity};

fn main() -> faraday_noon::Result<()> {
    let channel = VaporChannel::new(CellConfig::default(), noon_probe_frequency());
    let state = make_noon_state(1.94, mixing_for_fidelity(0.9)?)?;
    let curve = fisher_curve(&state, &channel, &linspace(0.0, 0.05, 11), DEFAULT_STEP, false)?;
    println!("B_mT  FI_1/T^2   FI_per_scatter");
    for p in &curve.points {
        let per_scatter = p.fisher_per_scatter.map_or("-".into(), |v| format!("{v:.4e}"));
        println!("{:5.1} {:.4e} {per_scatter}", p.fisher.field * 1e3, p.fisher.total);
    }
    Ok(())
}
