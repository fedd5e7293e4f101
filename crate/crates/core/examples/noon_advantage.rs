//! NOON over single-photon information ratios at 37 mT, with and without Rb-87.

use faraday_noon::cli::RunConfig;
use faraday_noon::metrology::advantage_ratios;

fn main() -> faraday_noon::Result<()> {
    let config = RunConfig::default();
    let (state, phase) = config.pair_state()?;
    let r = advantage_ratios(
        0.037,
        &config.cell_config()?,
        config.probe_frequency(),
        false,
        &state,
        &config.advantage_options(),
    )?;
    let show = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.4}"));
    println!("NOON phase {:.5}", phase.unwrap_or(f64::NAN));
    println!("per photon            {:.4}", r.per_photon_ratio);
    println!("per scatter           {}", show(r.per_scatter_ratio));
    println!("per scatter, Rb-85    {}", show(r.per_scatter_ratio_pure85));
    println!("per photon, adjusted  {:.4}", r.per_photon_adjusted);
    Ok(())
}
