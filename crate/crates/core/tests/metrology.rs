use std::f64::consts::{FRAC_PI_2, PI};

use faraday_noon::atomic::{CellConfig, IsotopeFactor, TransferCoefficients};
use faraday_noon::channel::{Channel, RotationChannel, VaporChannel};
use faraday_noon::constants::noon_probe_frequency;
use faraday_noon::grid::linspace;
use faraday_noon::metrology::{
    advantage_on_channel, fisher_curve, fisher_from_derivatives, fisher_information, magnetic_uncertainty,
    scattering_mean, sql_optimize, AdvantageOptions, EfficiencyModel, ScatteringOperator, SingleProbe, SqlObjective,
    SqlOptions, DEFAULT_STEP,
};
use faraday_noon::optimize::{nelder_mead, NelderMeadOptions};
use faraday_noon::polarimetry::{
    analyze_fringe, make_noon_state, pair_signal, single_probabilities, Analyzer, Basis, Measurement,
    SinglePhotonState, TwoPhotonState,
};
use faraday_noon::Result;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model() -> VaporChannel {
    VaporChannel::new(CellConfig::default(), noon_probe_frequency())
}

fn pair_fi<C: Channel>(state: &TwoPhotonState, ch: &C, b: f64, step: f64) -> faraday_noon::metrology::FisherPoint {
    let m = Measurement::pair(state);
    fisher_information(|x| Ok(m.probabilities_for(&ch.coefficients(x)?)), b, step).unwrap()
}

/// Single-photon FI through the generic state/analyzer path, independent of the SQL probe.
fn single_fi<C: Channel>(ch: &C, b: f64, angles: [f64; 4]) -> f64 {
    let s = SinglePhotonState::from_angles(angles[0], angles[1]).unwrap();
    let an = Analyzer::from_angles(angles[2], angles[3]);
    fisher_information(
        |x| {
            let t = ch.coefficients(x)?;
            Ok(single_probabilities(&s, t.t_plus, t.t_minus, &an).to_vec())
        },
        b,
        DEFAULT_STEP,
    )
    .unwrap()
    .total
}

#[test]
fn constant_probabilities_carry_no_information() {
    let f = fisher_information(|_| Ok(vec![0.2, 0.5, 0.3]), 0.01, 1e-5).unwrap();
    assert_eq!(f.total, 0.0);
}

#[test]
fn lossless_noon_and_sql_follow_closed_forms() {
    let rate = 37.0;
    let ch = RotationChannel::lossless(rate);
    let noon = make_noon_state(0.0, 1.0).unwrap();
    for b in [0.003, 0.011, 0.017, 0.029] {
        let fi = pair_fi(&noon, &ch, b, DEFAULT_STEP).total;
        assert!((fi / (16.0 * rate * rate) - 1.0).abs() < 1e-8, "B={b}: {fi}");
        let adv = advantage_on_channel(&noon, &ch, b, &AdvantageOptions::default()).unwrap();
        assert!((adv.sql_per_photon.fisher / (4.0 * rate * rate) - 1.0).abs() < 1e-8);
        assert!((adv.per_photon - 2.0).abs() <= 1e-6, "{}", adv.per_photon);
    }
}

#[test]
fn every_linear_input_with_diagonal_analyzer_is_optimal() {
    let rate = 20.0;
    let ch = RotationChannel::lossless(rate);
    let sql = sql_optimize(&ch, 0.01, SqlObjective::PerPhoton, &SqlOptions::default()).unwrap();
    for beta in [0.0, 0.9, 2.1, 4.0] {
        // Linear inputs sit on the Bloch equator; the analyzer azimuth a quarter turn away is 45 degrees off.
        for d in [beta + FRAC_PI_2, beta - FRAC_PI_2] {
            let fi = single_fi(&ch, 0.01, [FRAC_PI_2, beta, FRAC_PI_2, d]);
            assert!((fi - sql.fisher).abs() <= 1e-8 * sql.fisher, "{beta}: {fi} vs {}", sql.fisher);
        }
    }
}

#[test]
fn fisher_contributions_add_up_and_stay_non_negative() {
    let noon = make_noon_state(1.94, 0.85).unwrap();
    let curve = fisher_curve(&noon, &model(), &linspace(0.0, 0.05, 51), DEFAULT_STEP, false).unwrap();
    for p in &curve.points {
        let sum: f64 = p.fisher.contributions.iter().sum();
        assert!((sum - p.fisher.total).abs() <= 1e-10 * p.fisher.total.max(1.0));
        assert!(p.fisher.total >= 0.0 && p.fisher.contributions.iter().all(|c| *c >= 0.0));
        assert!((0.0..=2.0).contains(&p.scattering));
    }
}

/// Central difference with two levels of Richardson extrapolation.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let r1 = |h: f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    (16.0 * r1(h / 2.0) - r1(h)) / 15.0
}

#[test]
fn finite_difference_fisher_matches_richardson_oracle() {
    let ch = model();
    let noon = make_noon_state(1.94, 0.85).unwrap();
    let m = Measurement::pair(&noon);
    let p = |b: f64| m.probabilities_for(&ch.coefficients(b).unwrap());
    let b = 0.037;
    let probs = p(b);
    let derivs: Vec<f64> = (0..3).map(|k| richardson(|x| p(x)[k], b, 80e-6)).collect();
    let oracle = fisher_from_derivatives(b, probs, derivs);
    let fi = pair_fi(&noon, &ch, b, DEFAULT_STEP);
    assert!((fi.total / oracle.total - 1.0).abs() <= 1e-6, "{} vs {}", fi.total, oracle.total);
}

#[test]
fn fisher_vanishes_at_lossless_fringe_extrema() {
    let ch = model().lossless(true);
    let noon = make_noon_state(0.3, 0.8).unwrap();
    let grid = linspace(0.0, 0.05, 101);
    let max = grid.iter().map(|&b| pair_fi(&noon, &ch, b, DEFAULT_STEP).total).fold(0.0, f64::max);
    let fringe = analyze_fringe(pair_signal(&noon, &ch, 0), &grid).unwrap();
    let interior: Vec<f64> = fringe.extrema.iter().map(|e| e.field).filter(|b| *b > 1e-3 && *b < 0.049).collect();
    assert!(!interior.is_empty());
    for b in interior {
        let fi = pair_fi(&noon, &ch, b, DEFAULT_STEP).total;
        assert!(fi < 1e-6 * max, "B={b}: {fi} vs max {max}");
    }
}

#[test]
fn full_model_fisher_dips_sit_at_coincidence_extrema() {
    let ch = model();
    let noon = make_noon_state(1.94, 0.85).unwrap();
    let grid = linspace(0.0, 0.05, 201);
    let fi: Vec<f64> = grid.iter().map(|&b| pair_fi(&noon, &ch, b, DEFAULT_STEP).total).collect();
    let extrema: Vec<f64> = (0..3)
        .flat_map(|k| analyze_fringe(pair_signal(&noon, &ch, k), &grid).unwrap().extrema)
        .map(|e| e.field)
        .collect();
    let dips: Vec<f64> = (1..grid.len() - 1).filter(|&i| fi[i] < fi[i - 1] && fi[i] <= fi[i + 1]).map(|i| grid[i]).collect();
    assert!(!dips.is_empty());
    for d in dips {
        let nearest = extrema.iter().map(|e| (e - d).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest <= 1e-3, "dip at {d} T is {nearest} T from a fringe extremum");
    }
}

/// Same phases as the model, with |t| frozen at its value at `reference`.
struct FrozenLoss {
    model: VaporChannel,
    reference: TransferCoefficients,
}

impl Channel for FrozenLoss {
    fn coefficients(&self, field: f64) -> Result<TransferCoefficients> {
        let t = self.model.coefficients(field)?;
        let factors = t
            .factors
            .iter()
            .map(|f| {
                let (p, m) = self.reference.factor(f.isotope);
                IsotopeFactor {
                    isotope: f.isotope,
                    plus: C64::from_polar(p.norm(), f.plus.arg()),
                    minus: C64::from_polar(m.norm(), f.minus.arg()),
                }
            })
            .collect();
        Ok(TransferCoefficients::from_factors(factors))
    }
}

#[test]
fn field_dependent_loss_adds_information_somewhere() {
    let noon = make_noon_state(1.94, 0.85).unwrap();
    let mut gains = 0;
    for b in linspace(0.002, 0.05, 25) {
        let full = pair_fi(&noon, &model(), b, DEFAULT_STEP);
        let frozen = FrozenLoss {
            model: model(),
            reference: model().coefficients(b).unwrap(),
        };
        let rot = pair_fi(&noon, &frozen, b, DEFAULT_STEP);
        assert!((full.probabilities[0] - rot.probabilities[0]).abs() < 1e-12);
        if full.contributions.iter().zip(&rot.contributions).any(|(f, r)| f > r) {
            gains += 1;
        }
    }
    assert!(gains >= 1);
}

#[test]
fn sql_dominates_random_configurations() {
    let ch = model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for b in [0.0, 0.024, 0.049] {
        let sql = sql_optimize(&ch, b, SqlObjective::PerPhoton, &SqlOptions::default()).unwrap();
        for _ in 0..100 {
            let angles = [rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)];
            let fi = single_fi(&ch, b, angles);
            assert!(fi <= sql.fisher * (1.0 + 1e-9), "B={b}: {fi} > {}", sql.fisher);
        }
    }
}

#[test]
fn sql_at_zero_field_reproduces_grid_search() {
    let ch = model();
    let probe = SingleProbe::new(&ch, 0.0, DEFAULT_STEP, false).unwrap();
    let sql = sql_optimize(&ch, 0.0, SqlObjective::PerPhoton, &SqlOptions::default()).unwrap();
    assert!(sql.fisher >= 0.0);
    let n = 100;
    let azimuths: Vec<f64> = (0..8).map(|k| 2.0 * PI * k as f64 / 8.0).collect();
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for i in 0..n {
        for j in 0..n {
            let (a, c) = (PI * i as f64 / (n - 1) as f64, PI * j as f64 / (n - 1) as f64);
            for &bz in &azimuths {
                for &d in &azimuths {
                    let x = [a, bz, c, d];
                    let v = probe.fisher(&x).total;
                    if v > best.0 {
                        best = (v, x);
                    }
                }
            }
        }
    }
    assert!(best.0 <= sql.fisher * (1.0 + 1e-9));
    let polished = nelder_mead(
        |x| -probe.fisher(&[x[0], x[1], x[2], x[3]]).total,
        &best.1,
        &NelderMeadOptions {
            step: 0.02,
            f_tol: 1e-12,
            x_tol: 1e-9,
            max_evals: 20_000,
            restarts: 1,
        },
    );
    assert!((-polished.value / sql.fisher - 1.0).abs() <= 1e-4, "{} vs {}", -polished.value, sql.fisher);
}

#[test]
fn per_scatter_self_comparison_is_one() {
    let ch = model();
    let b = 0.037;
    let sql = sql_optimize(&ch, b, SqlObjective::PerScatter, &SqlOptions::default()).unwrap();
    let probe = SingleProbe::new(&ch, b, DEFAULT_STEP, false).unwrap();
    let angles = [sql.input[0], sql.input[1], sql.analyzer[0], sql.analyzer[1]];
    let own = probe.objective(&angles, SqlObjective::PerScatter);
    assert!((own / sql.fisher_per_scatter.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scattering_examples() {
    let noon = make_noon_state(0.7, 1.0).unwrap();
    let none = ScatteringOperator::from_intensities(1.0, 1.0);
    assert_eq!(scattering_mean(noon.density(), &none).unwrap(), 0.0);
    let opaque = ScatteringOperator::from_intensities(0.0, 0.0);
    let mixed = TwoPhotonState::maximally_mixed(Basis::Hv);
    assert!((scattering_mean(mixed.density(), &opaque).unwrap() - 2.0).abs() < 1e-12);
    let op = ScatteringOperator::from_intensities(0.9, 0.8);
    assert!((scattering_mean(noon.density(), &op).unwrap() - 0.3).abs() < 1e-12);
    let single = SinglePhotonState::linear(0.4);
    assert!((scattering_mean(single.density(), &op).unwrap() - 0.15).abs() < 1e-12);
}

#[test]
fn magnetic_uncertainty_examples() {
    assert_eq!(magnetic_uncertainty(1.0, 1).unwrap(), 1.0);
    assert_eq!(magnetic_uncertainty(4.0, 1).unwrap(), 0.5);
    let a = magnetic_uncertainty(3.0, 10).unwrap();
    let b = magnetic_uncertainty(3.0, 40).unwrap();
    assert!((a / b - 2.0).abs() < 1e-12);
    assert!(magnetic_uncertainty(0.0, 1).is_err());
    assert!(magnetic_uncertainty(1.0, 0).is_err());
}

#[test]
fn efficiency_scaling() {
    let ideal = EfficiencyModel::ideal();
    assert_eq!(ideal.ratio(1.3), 1.3);
    assert_eq!(ideal.pair_fisher(5.0), 5.0);
    let e = EfficiencyModel::default();
    assert!((e.extrinsic() - 0.95 * 0.984).abs() < 1e-15);
    let (noon, sql) = (7.0, 2.0);
    let ratio = noon / (2.0 * sql);
    let adjusted = e.pair_fisher(noon) / (2.0 * e.single_fisher(sql));
    assert!((adjusted - e.ratio(ratio)).abs() < 1e-12);
    assert!(EfficiencyModel { detection: 0.0, path: 1.0 }.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scattering_operator_is_additive(p in 0.0f64..1.0, m in 0.0f64..1.0) {
        let op = ScatteringOperator::from_intensities(p, m);
        let pair = op.pair();
        prop_assert_eq!(pair[1], op.single[0] + op.single[1]);
        prop_assert!(pair.iter().all(|s| (0.0..=2.0).contains(s)));
    }

    #[test]
    fn pair_fisher_is_additive_and_non_negative(phi in 0.0f64..PI, p in 0.0f64..1.0, b in 0.0f64..0.06) {
        let ch = RotationChannel { rate: 30.0, amplitude: 0.9 };
        let f = pair_fi(&make_noon_state(phi, p).unwrap(), &ch, b, DEFAULT_STEP);
        let sum: f64 = f.contributions.iter().sum();
        prop_assert!(f.total >= 0.0);
        prop_assert!((sum - f.total).abs() <= 1e-10 * f.total.max(1.0));
    }
}
