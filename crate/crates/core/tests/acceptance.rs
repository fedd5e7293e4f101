//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{breit_rabi, rel, voigt_by_convolution};
use faraday_noon::atomic::{diagonalize_levels, transition_table, transmission_spectrum, voigt_profile, CellConfig, Manifold};
use faraday_noon::channel::{Channel, RotationChannel, VaporChannel};
use faraday_noon::cli::RunConfig;
use faraday_noon::constants::{noon_probe_frequency, Isotope};
use faraday_noon::grid::linspace;
use faraday_noon::metrology::{
    advantage_on_channel, advantage_ratios, fisher_curve, fisher_from_derivatives, fisher_information, sql_optimize, AdvantageOptions, PairProbe, SqlObjective, SqlOptions, DEFAULT_STEP,
};
use faraday_noon::polarimetry::{
    analyze_fringe, make_noon_state, mixing_for_fidelity, pair_signal, single_probabilities, singles_signal, Analyzer, Measurement,
    SinglePhotonState,
};
use faraday_noon::tomography::{expected_counts, fi_error_band, reconstruct, simulate_counts, BandOptions, ReconstructOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn model() -> VaporChannel {
    VaporChannel::new(CellConfig::default(), noon_probe_frequency())
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for iso in Isotope::ALL {
        let c = iso.constants();
        for b in linspace(0.0, 0.1, 50) {
            let got = diagonalize_levels(c, Manifold::Ground, b).unwrap().energies();
            for (g, w) in got.iter().zip(breit_rabi(c, b)) {
                worst = worst.max(rel(*g, w));
            }
        }
    }
    (worst <= 1e-9, format!("max relative error {worst:.2e} (limit 1e-9)"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = rng.random_range(50e6..400e6);
        let gamma = rng.random_range(1e6..60e6);
        let delta = rng.random_range(-3e9..3e9);
        let want = voigt_by_convolution(delta, sigma, gamma);
        worst = worst.max((voigt_profile(delta, sigma, gamma) - want).norm() / want.norm());
    }
    (worst <= 1e-7, format!("max relative error {worst:.2e} over 100 triples (limit 1e-7)"))
}

fn cell_at(temperature_c: f64) -> CellConfig {
    CellConfig {
        temperature_c,
        ..CellConfig::default()
    }
}

fn criterion_3() -> Outcome {
    let centroid = Isotope::Rb85.constants().d1_frequency;
    let detunings = linspace(-4500e6, 5000e6, 4751);
    let probes: Vec<f64> = detunings.iter().map(|d| centroid + d).collect();
    let spectrum = |b: f64| -> Vec<f64> {
        transmission_spectrum(&cell_at(83.0), &probes, b)
            .unwrap()
            .iter()
            .map(|t| t.linear_transmission())
            .collect()
    };

    let mut lines: Vec<f64> = transition_table(Isotope::Rb85.constants(), 0.0)
        .unwrap()
        .iter()
        .filter(|t| t.sigma_plus + t.sigma_minus > 0.0)
        .map(|t| t.frequency - centroid)
        .collect();
    lines.sort_by(f64::total_cmp);
    lines.dedup_by(|a, b| (*a - *b).abs() < 1e6);

    let t0 = spectrum(0.0);
    let minima: Vec<f64> = (1..t0.len() - 1)
        .filter(|&i| t0[i] < t0[i - 1] && t0[i] <= t0[i + 1])
        .map(|i| detunings[i])
        .collect();
    let matched = lines
        .iter()
        .filter(|l| minima.iter().any(|m| (m - *l).abs() <= 30e6))
        .count();

    let fields = [0.0, 12.0, 24.0, 37.0, 49.0, 58.0];
    let step = detunings[1] - detunings[0];
    let widths: Vec<f64> = fields
        .iter()
        .map(|b| spectrum(b * 1e-3).iter().filter(|t| **t < 0.5).count() as f64 * step * 1e-6)
        .collect();
    let broadening = widths.windows(2).all(|w| w[1] > w[0]);
    (
        lines.len() == 4 && matched == 4 && broadening,
        format!(
            "{matched}/{} Rb-85 lines have a local minimum within 30 MHz ({} minima found); absorbing width (MHz) vs B: {:?}",
            lines.len(),
            minima.len(),
            widths.iter().map(|w| w.round()).collect::<Vec<_>>()
        ),
    )
}

fn criterion_4() -> Outcome {
    let grid = linspace(0.0, 0.05, 201);
    let noon = make_noon_state(FRAC_PI_2, 1.0).unwrap();
    let ch = model();
    let singles = analyze_fringe(singles_signal(&SinglePhotonState::linear(0.0), &ch), &grid).unwrap();
    let pairs = analyze_fringe(pair_signal(&noon, &ch, 0), &grid).unwrap();
    let ratio = match (singles.period(), pairs.period()) {
        (Some(s), Some(p)) => s / p,
        _ => f64::NAN,
    };
    let lossy: Vec<f64> = [0, 2].iter().map(|&k| analyze_fringe(pair_signal(&noon, &ch, k), &grid).unwrap().visibility()).collect();
    let lossless_ch = model().lossless(true);
    let ideal: Vec<f64> = [0, 2]
        .iter()
        .map(|&k| analyze_fringe(pair_signal(&noon, &lossless_ch, k), &grid).unwrap().visibility())
        .collect();
    let pass = (ratio / 2.0 - 1.0).abs() <= 0.02
        && lossy.iter().all(|v| *v > 0.33)
        && ideal.iter().all(|v| (v - 1.0).abs() <= 1e-6);
    (
        pass,
        format!("singles/coincidence period ratio {ratio:.4}; HH/VV visibility {lossy:.4?}, lossless {ideal:.7?}"),
    )
}

fn criterion_5() -> Outcome {
    let rate = 37.0;
    let ch = RotationChannel::lossless(rate);
    let noon = make_noon_state(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for b in [0.003, 0.011, 0.017, 0.029] {
        let adv = advantage_on_channel(&noon, &ch, b, &AdvantageOptions::default()).unwrap();
        worst = worst.max((adv.per_photon - 2.0).abs());
        oracle = oracle
            .max((adv.noon_fisher / (16.0 * rate * rate) - 1.0).abs())
            .max((adv.sql_per_photon.fisher / (4.0 * rate * rate) - 1.0).abs());
    }
    (
        worst <= 1e-6 && oracle <= 1e-6,
        format!("max |ratio - 2| {worst:.2e}; max relative deviation from 16r^2 and 4r^2 {oracle:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let c = RunConfig::default();
    let (state, phi) = c.pair_state().unwrap();
    let r = advantage_ratios(0.037, &c.cell_config().unwrap(), c.probe_frequency(), false, &state, &c.advantage_options()).unwrap();
    let pp = r.per_photon_ratio;
    let ps = r.per_scatter_ratio.unwrap_or(f64::NAN);
    let ps85 = r.per_scatter_ratio_pure85.unwrap_or(f64::NAN);
    let adj = r.per_photon_adjusted;
    let checks = [
        ("per-photon", pp, 1.15, 1.45),
        ("per-scatter", ps, 1.10, 1.35),
        ("per-scatter without Rb-87", ps85, 1.25, 1.55),
        ("efficiency-adjusted per-photon", adj, 1.06, 1.36),
    ];
    let pass = checks.iter().all(|(_, v, lo, hi)| *v > 1.0 && v >= lo && v <= hi);
    let detail = checks
        .iter()
        .map(|(n, v, lo, hi)| format!("{n} {v:.4} in [{lo}, {hi}]: {}", if v >= lo && v <= hi { "yes" } else { "no" }))
        .collect::<Vec<_>>()
        .join("; ");
    (pass, format!("phase {:.5}; {detail}", phi.unwrap_or(f64::NAN)))
}

fn criterion_7() -> Outcome {
    let ch = model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut checked = 0;
    for b in linspace(0.0, 0.05, 10) {
        let sql = sql_optimize(&ch, b, SqlObjective::PerPhoton, &SqlOptions::default()).unwrap();
        for _ in 0..100 {
            let input = SinglePhotonState::from_angles(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)).unwrap();
            let analyzer = Analyzer::from_angles(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
            let fi = fisher_information(
                |x| {
                    let t = ch.coefficients(x)?;
                    Ok(single_probabilities(&input, t.t_plus, t.t_minus, &analyzer).to_vec())
                },
                b,
                DEFAULT_STEP,
            )
            .unwrap()
            .total;
            checked += 1;
            if fi > sql.fisher * (1.0 + 1e-9) {
                violations += 1;
            }
        }
    }
    (violations == 0, format!("{violations} violations in {checked} random configurations at 10 fields"))
}

fn criterion_8() -> Outcome {
    let ch = model();
    let truth = make_noon_state(FRAC_PI_2, mixing_for_fidelity(0.9).unwrap()).unwrap();
    let grid = linspace(0.0, 0.06, 20);
    let flux = 3e5;
    let expected = expected_counts(&truth, &ch, &grid, flux, 1.0).unwrap();
    let mean_counts = expected.records.iter().flat_map(|r| r.counts).sum::<f64>() / (3 * grid.len()) as f64;
    let opts = ReconstructOptions::default();

    let noiseless = reconstruct(&expected, &ch, &opts).unwrap();
    let f_noiseless = noiseless.state.fidelity(truth.density()).unwrap();

    let true_fi = PairProbe::new(&ch, 0.037, DEFAULT_STEP, false).unwrap().fisher(&truth).total;
    let (mut good, mut covered) = (0, 0);
    for seed in 0..20 {
        let d = simulate_counts(&truth, &ch, &grid, flux, 1.0, seed).unwrap();
        let r = reconstruct(&d, &ch, &opts).unwrap();
        if r.state.fidelity(truth.density()).unwrap() >= 0.99 {
            good += 1;
        }
        let band = fi_error_band(&r, &d, &ch, 0.037, 1.0, &BandOptions::default()).unwrap();
        if band.min <= true_fi && true_fi <= band.max {
            covered += 1;
        }
    }
    (
        good >= 19 && f_noiseless >= 0.9999 && covered >= 18,
        format!(
            "mean expected counts {mean_counts:.3e}; fidelity >= 0.99 in {good}/20; noiseless fidelity {f_noiseless:.7}; band covers true FI in {covered}/20"
        ),
    )
}

/// Central difference with two levels of Richardson extrapolation.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let r1 = |h: f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    (16.0 * r1(h / 2.0) - r1(h)) / 15.0
}

fn criterion_9() -> Outcome {
    let ch = model();
    let noon = make_noon_state(1.94, mixing_for_fidelity(0.9).unwrap()).unwrap();
    let m = Measurement::pair(&noon);
    let p = |b: f64| m.probabilities_for(&ch.coefficients(b).unwrap());
    let mut worst: f64 = 0.0;
    for b in linspace(0.0035, 0.0485, 10) {
        let derivs: Vec<f64> = (0..3).map(|k| richardson(|x| p(x)[k], b, 80e-6)).collect();
        let oracle = fisher_from_derivatives(b, p(b), derivs);
        let fi = fisher_information(|x| Ok(p(x)), b, DEFAULT_STEP).unwrap();
        worst = worst.max((fi.total / oracle.total - 1.0).abs());
    }
    let curve = fisher_curve(&noon, &ch, &linspace(0.0, 0.05, 201), DEFAULT_STEP, false).unwrap();
    let sum_err = curve
        .points
        .iter()
        .map(|q| (q.fisher.contributions.iter().sum::<f64>() - q.fisher.total).abs() / q.fisher.total.max(1.0))
        .fold(0.0, f64::max);
    let non_negative = curve.points.iter().all(|q| q.fisher.total >= 0.0 && q.fisher.contributions.iter().all(|c| *c >= 0.0));
    (
        worst <= 1e-6 && sum_err <= 1e-10 && non_negative,
        format!("max relative deviation from Richardson {worst:.2e}; contribution sum error {sum_err:.1e}; non-negative {non_negative}"),
    )
}

const SMALL_CONFIG: &str = r#"seed = 11
[grid]
points = 9
[spectra]
temperatures_c = [53.0]
fields_mt = [0.0, 24.0]
points = 101
[sql]
starts = 4
[tomo]
points = 10
starts = 2
"#;

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv" || x == "json") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_10() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    fs::write(root.path().join("run.toml"), SMALL_CONFIG).unwrap();
    let commands: [&[&str]; 6] = [&["spectra"], &["fringes"], &["fisher"], &["sql"], &["advantage"], &["tomo", "--simulate"]];
    let mut mismatched = Vec::new();
    for cmd in commands {
        let mut runs = Vec::new();
        for (k, threads) in ["1", "1", "4"].iter().enumerate() {
            let cwd = root.path().join(format!("{}-{k}", cmd[0]));
            fs::create_dir_all(&cwd).unwrap();
            let status = Command::new(env!("CARGO_BIN_EXE_faraday-noon"))
                .current_dir(&cwd)
                .args(cmd)
                .args(["--config", "../run.toml", "--out", "out", "--threads", threads])
                .output()
                .unwrap();
            if !status.status.success() {
                return (false, format!("{cmd:?} failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            runs.push(outputs(&cwd.join("out")));
        }
        if runs[0].is_empty() || runs[0] != runs[1] || runs[0] != runs[2] {
            mismatched.push(cmd[0]);
        }
    }
    (
        mismatched.is_empty(),
        format!("6 commands x (2 runs at 1 thread, 1 run at 4 threads); differing outputs: {mismatched:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "Breit-Rabi oracle", criterion_1, Duration::from_secs(1)),
        (2, "Voigt oracle", criterion_2, Duration::from_secs(10)),
        (3, "spectra regression", criterion_3, Duration::from_secs(30)),
        (4, "super-resolution", criterion_4, Duration::from_secs(30)),
        (5, "lossless Heisenberg ratio", criterion_5, Duration::from_secs(10)),
        (6, "full-model advantage bands", criterion_6, Duration::from_secs(300)),
        (7, "SQL dominance", criterion_7, Duration::from_secs(120)),
        (8, "tomography round trip", criterion_8, Duration::from_secs(600)),
        (9, "FI numerical hygiene", criterion_9, Duration::from_secs(60)),
        (10, "determinism", criterion_10, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (n, name, check, budget) in criteria {
        let start = Instant::now();
        let (ok, detail) = check();
        let elapsed = start.elapsed();
        let pass = ok && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {detail} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
