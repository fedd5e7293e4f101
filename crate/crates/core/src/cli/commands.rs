//! Subcommand bodies: library calls plus file output.

use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::output::OutputDir;
use super::svg::{line_chart, Series};
use crate::atomic::transmission_spectrum;
use crate::channel::{Channel, VaporChannel};
use crate::constants::Isotope;
use crate::metrology::{advantage_ratios, fisher_curve, sql_optimize, PairProbe, SqlObjective, SqlResult};
use crate::polarimetry::{
    analyze_fringe, fringe_scan, pair_signal, singles_signal, FringeAnalysis, TwoPhotonState, fmt_float, csv_err,
};
use crate::tomography::{fi_error_band, reconstruct, simulate_counts, CoincidenceDataset, FiBand, TomographyResult};
use crate::{Error, Result};

/// Outcome of one command: files written and a one-line summary.
pub struct Report {
    pub files: Vec<std::path::PathBuf>,
    pub summary: String,
}

fn finish(out: OutputDir, config: &RunConfig, summary: String) -> Result<Report> {
    let mut out = out;
    out.write("config.toml", config.to_toml()?.as_bytes())?;
    Ok(Report {
        files: out.written().to_vec(),
        summary,
    })
}

fn tag(v: f64) -> String {
    format!("{v}").replace('-', "m")
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

fn opt_fmt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// One CSV per (temperature, field) of transmission versus detuning, one overlay plot per temperature.
pub fn spectra(config: &RunConfig) -> Result<Report> {
    let mut out = OutputDir::create(&config.out)?;
    let detunings = config.detunings()?;
    let centroid = Isotope::Rb85.constants().d1_frequency;
    let probes: Vec<f64> = detunings.iter().map(|d| centroid + d).collect();
    let det_mhz: Vec<f64> = detunings.iter().map(|d| d * 1e-6).collect();
    let mut count = 0;
    for &temp in &config.spectra.temperatures_c {
        let mut cell = config.cell_config()?;
        cell.temperature_c = temp;
        let mut series = Vec::new();
        for &b_mt in &config.spectra.fields_mt {
            let mut t = transmission_spectrum(&cell, &probes, b_mt * 1e-3)?;
            if config.cell.lossless {
                t = t.iter().map(|x| x.lossless()).collect();
            }
            let linear: Vec<f64> = t.iter().map(|x| x.linear_transmission()).collect();
            let rows = det_mhz.iter().zip(&t).zip(&linear).map(|((d, x), l)| {
                vec![fmt_float(*d), fmt_float(*l), fmt_float(x.t_plus.norm_sqr()), fmt_float(x.t_minus.norm_sqr())]
            });
            let bytes = csv_bytes(&["detuning_MHz", "T", "T_plus", "T_minus"], rows)?;
            out.write(&format!("spectra/spectrum_T{}C_B{}mT.csv", tag(temp), tag(b_mt)), &bytes)?;
            series.push(Series::new(format!("{b_mt} mT"), &det_mhz, &linear));
            count += 1;
        }
        let svg = line_chart(
            &format!("Transmission at {temp} °C"),
            "detuning from Rb-85 D1 centroid (MHz)",
            "transmission",
            &series,
        );
        out.write(&format!("spectra/spectra_T{}C.svg", tag(temp)), svg.as_bytes())?;
    }
    finish(out, config, format!("{count} spectra"))
}

#[derive(Serialize)]
struct FringeSummary {
    noon_phase: Option<f64>,
    hh: FringeAnalysis,
    hv: FringeAnalysis,
    vv: FringeAnalysis,
    singles: FringeAnalysis,
    /// Periods in mT.
    period_hh_mt: Option<f64>,
    period_vv_mt: Option<f64>,
    period_singles_mt: Option<f64>,
    visibility_hh: f64,
    visibility_vv: f64,
    visibility_singles: f64,
}

pub fn fringes(config: &RunConfig) -> Result<Report> {
    let mut out = OutputDir::create(&config.out)?;
    let channel = config.channel()?;
    let grid = config.grid()?;
    let (state, phi) = config.pair_state()?;
    let photon = config.single_photon()?;
    let table = fringe_scan(&state, &channel, &grid, config.state.pair_flux, Some(&photon))?;
    out.write("fringes.csv", &table.to_csv()?)?;

    let b_mt: Vec<f64> = grid.iter().map(|b| b * 1e3).collect();
    let col = |f: fn(&crate::polarimetry::FringeRow) -> f64| table.column(f);
    let svg = line_chart(
        "Coincidence and singles fringes",
        "B (mT)",
        "probability",
        &[
            Series::new("P_HH", &b_mt, &col(|r| r.p_hh)),
            Series::new("P_HV", &b_mt, &col(|r| r.p_hv)),
            Series::new("P_VV", &b_mt, &col(|r| r.p_vv)),
            Series::new("P_H", &b_mt, &col(|r| r.p_h.unwrap_or(f64::NAN))),
            Series::new("P_V", &b_mt, &col(|r| r.p_v.unwrap_or(f64::NAN))),
        ],
    );
    out.write("fringes.svg", svg.as_bytes())?;

    let hh = analyze_fringe(pair_signal(&state, &channel, 0), &grid)?;
    let hv = analyze_fringe(pair_signal(&state, &channel, 1), &grid)?;
    let vv = analyze_fringe(pair_signal(&state, &channel, 2), &grid)?;
    let singles = analyze_fringe(singles_signal(&photon, &channel), &grid)?;
    let summary = FringeSummary {
        noon_phase: phi,
        period_hh_mt: hh.period().map(|p| p * 1e3),
        period_vv_mt: vv.period().map(|p| p * 1e3),
        period_singles_mt: singles.period().map(|p| p * 1e3),
        visibility_hh: hh.visibility(),
        visibility_vv: vv.visibility(),
        visibility_singles: singles.visibility(),
        hh,
        hv,
        vv,
        singles,
    };
    out.write_json("fringes_summary.json", &summary)?;
    let line = format!(
        "periods (mT): HH {} VV {} singles {}; visibility HH {:.4} VV {:.4}",
        opt_fmt(summary.period_hh_mt),
        opt_fmt(summary.period_vv_mt),
        opt_fmt(summary.period_singles_mt),
        summary.visibility_hh,
        summary.visibility_vv
    );
    finish(out, config, line)
}

pub fn fisher(config: &RunConfig) -> Result<Report> {
    let mut out = OutputDir::create(&config.out)?;
    let channel = config.channel()?;
    let grid = config.grid()?;
    let (state, _) = config.pair_state()?;
    let curve = fisher_curve(&state, &channel, &grid, config.step(), config.fisher.include_no_click)?;
    out.write("fisher.csv", &curve.to_csv()?)?;
    let b_mt: Vec<f64> = grid.iter().map(|b| b * 1e3).collect();
    let mut series = vec![Series::new(
        "total",
        &b_mt,
        &curve.points.iter().map(|p| p.fisher.total * 1e-6).collect::<Vec<_>>(),
    )];
    for (k, name) in curve.outcomes.iter().enumerate() {
        let ys: Vec<f64> = curve.points.iter().map(|p| p.fisher.contributions[k] * 1e-6).collect();
        series.push(Series::new(name.clone(), &b_mt, &ys));
    }
    out.write(
        "fisher.svg",
        line_chart("Pair Fisher information", "B (mT)", "FI (1/mT^2)", &series).as_bytes(),
    )?;
    let peak = curve.points.iter().map(|p| p.fisher.total).fold(0.0, f64::max);
    finish(out, config, format!("peak pair FI {:.6e} 1/mT^2", peak * 1e-6))
}

/// Optimized single-photon Fisher information across the grid.
pub fn sql(config: &RunConfig) -> Result<Report> {
    let mut out = OutputDir::create(&config.out)?;
    let channel = config.channel()?;
    let grid = config.grid()?;
    let opts = config.sql_options();
    let results = grid
        .iter()
        .map(|&b| {
            let pp = sql_optimize(&channel, b, SqlObjective::PerPhoton, &opts)?;
            let ps = match sql_optimize(&channel, b, SqlObjective::PerScatter, &opts) {
                Ok(r) => Some(r),
                Err(Error::Undefined(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((pp, ps))
        })
        .collect::<Result<Vec<(SqlResult, Option<SqlResult>)>>>()?;
    let rows = results.iter().map(|(pp, ps)| {
        let mut r = vec![fmt_float(pp.field * 1e3), fmt_float(pp.fisher * 1e-6)];
        r.push(opt_fmt(ps.as_ref().and_then(|s| s.fisher_per_scatter).map(|v| v * 1e-6)));
        r.extend(pp.input.iter().chain(&pp.analyzer).map(|&a| fmt_float(a)));
        r
    });
    out.write(
        "sql.csv",
        &csv_bytes(&["B_mT", "FI_SQL", "FI_SQL_per_scatter", "a", "b", "c", "d"], rows)?,
    )?;
    let b_mt: Vec<f64> = grid.iter().map(|b| b * 1e3).collect();
    let fi: Vec<f64> = results.iter().map(|(pp, _)| pp.fisher * 1e-6).collect();
    out.write(
        "sql.svg",
        line_chart("Optimized single-photon Fisher information", "B (mT)", "FI (1/mT^2)", &[Series::new("SQL", &b_mt, &fi)])
            .as_bytes(),
    )?;
    let peak = fi.iter().copied().fold(0.0, f64::max);
    finish(out, config, format!("peak single-photon FI {peak:.6e} 1/mT^2"))
}

#[derive(Serialize)]
struct AdvantageSettings {
    field_mt: f64,
    temperature_c: f64,
    rb85_fraction: f64,
    rb87_fraction: f64,
    fidelity: f64,
    noon_phase: Option<f64>,
    lossless: bool,
    include_no_click: bool,
    probe_offset_mhz: f64,
}

#[derive(Serialize)]
struct AdvantageReport {
    settings: AdvantageSettings,
    ratios: crate::metrology::AdvantageRatios,
}

pub fn advantage(config: &RunConfig) -> Result<Report> {
    let mut out = OutputDir::create(&config.out)?;
    let (state, phi) = config.pair_state()?;
    let ratios = advantage_ratios(
        config.advantage_field(),
        &config.cell_config()?,
        config.probe_frequency(),
        config.cell.lossless,
        &state,
        &config.advantage_options(),
    )?;
    let line = format!(
        "per-photon {:.4}, per-scatter {}, per-scatter without Rb-87 {}, efficiency-adjusted per-photon {:.4}",
        ratios.per_photon_ratio,
        ratios.per_scatter_ratio.map_or("n/a".into(), |r| format!("{r:.4}")),
        ratios.per_scatter_ratio_pure85.map_or("n/a".into(), |r| format!("{r:.4}")),
        ratios.per_photon_adjusted
    );
    let report = AdvantageReport {
        settings: AdvantageSettings {
            field_mt: config.advantage.field_mt,
            temperature_c: config.cell.temperature_c,
            rb85_fraction: config.cell.rb85_fraction,
            rb87_fraction: config.cell.rb87_fraction,
            fidelity: config.state.fidelity,
            noon_phase: phi,
            lossless: config.cell.lossless,
            include_no_click: config.fisher.include_no_click,
            probe_offset_mhz: config.probe.offset_mhz,
        },
        ratios,
    };
    out.write_json("advantage.json", &report)?;
    finish(out, config, line)
}

#[derive(Serialize)]
struct TruthComparison {
    fidelity: f64,
    noon_phase: Option<f64>,
    true_fisher: f64,
    band: FiBand,
    band_contains_truth: bool,
}

fn band_for(
    config: &RunConfig,
    result: &TomographyResult,
    data: &CoincidenceDataset,
    channel: &VaporChannel,
) -> Result<FiBand> {
    fi_error_band(result, data, channel, config.band_field(), config.tomo.band_delta, &config.band_options())
}

/// Reconstruction from a counts file, or from counts simulated for the configured state.
pub fn tomo(config: &RunConfig, data: Option<&Path>) -> Result<Report> {
    let channel = config.channel()?;
    let (dataset, truth) = match data {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let d = CoincidenceDataset::from_csv(std::io::BufReader::new(file)).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?;
            (d, None)
        }
        None => {
            let (state, phi) = config.pair_state()?;
            let d = simulate_counts(
                &state,
                &channel,
                &config.tomo_grid()?,
                config.state.pair_flux,
                config.tomo.integration_time_s,
                config.seed,
            )?;
            (d, Some((state, phi)))
        }
    };
    let mut out = OutputDir::create(&config.out)?;
    if truth.is_some() {
        out.write("tomo_dataset.csv", &dataset.to_csv()?)?;
    }
    let mut result = reconstruct(&dataset, &channel, &config.reconstruct_options())?;
    let band = band_for(config, &result, &dataset, &channel)?;
    result.fi_band = Some(band.clone());
    out.write_json("tomo_result.json", &result)?;
    let mut line = format!(
        "chi2 {:.4}, NOON fidelity {:.6}, FI band [{:.6e}, {:.6e}] 1/mT^2",
        result.chi2,
        result.metrics.noon_fidelity,
        band.min * 1e-6,
        band.max * 1e-6
    );
    if let Some((state, phi)) = truth {
        let fidelity = result.state.fidelity(&state)?;
        let true_fisher = true_fisher(&state, &channel, config)?;
        let cmp = TruthComparison {
            fidelity,
            noon_phase: phi,
            true_fisher,
            band_contains_truth: band.min <= true_fisher && true_fisher <= band.max,
            band,
        };
        out.write_json("tomo_truth.json", &cmp)?;
        line = format!("round-trip fidelity {fidelity:.6}; {line}");
    }
    finish(out, config, line)
}

fn true_fisher<C: Channel>(state: &TwoPhotonState, channel: &C, config: &RunConfig) -> Result<f64> {
    Ok(PairProbe::new(channel, config.band_field(), crate::metrology::DEFAULT_STEP, false)?
        .fisher(state)
        .total)
}
