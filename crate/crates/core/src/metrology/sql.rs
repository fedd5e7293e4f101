//! Best single-photon Fisher information: the standard quantum limit.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fisher::{fisher_from_stencil, stencil_fields, with_no_click, FisherPoint, DEFAULT_STEP};
use super::scattering::ScatteringOperator;
use crate::channel::Channel;
use crate::optimize::{nelder_mead, HaltonSequence, NelderMeadOptions};
use crate::polarimetry::{bloch_vector, Analyzer};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqlObjective {
    /// Fisher information per photon.
    PerPhoton,
    /// Fisher information per scattered photon.
    PerScatter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqlOptions {
    pub starts: usize,
    pub seed: u64,
    /// Finite-difference step, tesla.
    pub step: f64,
    /// Relative convergence tolerance on the objective.
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub include_no_click: bool,
}

impl Default for SqlOptions {
    fn default() -> Self {
        SqlOptions {
            starts: 16,
            seed: 1,
            step: DEFAULT_STEP,
            tolerance: 1e-10,
            max_evaluations: 20_000,
            include_no_click: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    /// `[a, b, c, d]` start angles.
    pub start: [f64; 4],
    pub best: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqlResult {
    pub field: f64,
    pub objective: SqlObjective,
    /// Input `cos(a/2)|L> + e^{ib} sin(a/2)|R>` as `[a, b]`.
    pub input: [f64; 2],
    /// Analyzer port angles `[c, d]` (see [`Analyzer::from_angles`]).
    pub analyzer: [f64; 2],
    /// 1/T^2.
    pub fisher: f64,
    pub scattering: f64,
    pub fisher_per_scatter: Option<f64>,
    pub restarts: Vec<RestartRecord>,
}

/// Single-photon probe at one field with cell coefficients cached on the stencil.
#[derive(Clone, Debug)]
pub struct SingleProbe {
    field: f64,
    step: f64,
    include_no_click: bool,
    coefficients: [(C64, C64); 5],
    scattering: ScatteringOperator,
}

impl SingleProbe {
    pub fn new<C: Channel>(channel: &C, field: f64, step: f64, include_no_click: bool) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!("derivative step {step} must be positive")));
        }
        let mut coefficients = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); 5];
        let mut scattering = None;
        for (slot, b) in coefficients.iter_mut().zip(stencil_fields(field, step)) {
            let t = channel.coefficients(b)?;
            if scattering.is_none() {
                scattering = Some(ScatteringOperator::from_coefficients(&t));
            }
            *slot = (t.t_plus, t.t_minus);
        }
        Ok(SingleProbe {
            field,
            step,
            include_no_click,
            coefficients,
            scattering: scattering.expect("stencil is non-empty"),
        })
    }

    pub fn scattering_operator(&self) -> ScatteringOperator {
        self.scattering
    }

    fn probabilities(&self, input: &[C64; 2], ports: &[[C64; 2]; 2], k: usize) -> Vec<f64> {
        let (tp, tm) = self.coefficients[k];
        let out = [tp * input[0], tm * input[1]];
        let p: Vec<f64> = ports
            .iter()
            .map(|m| (m[0].conj() * out[0] + m[1].conj() * out[1]).norm_sqr())
            .collect();
        if self.include_no_click {
            with_no_click(p)
        } else {
            p
        }
    }

    /// Fisher information for input angles `(a, b)` and analyzer angles `(c, d)`.
    pub fn fisher(&self, angles: &[f64; 4]) -> FisherPoint {
        let input = bloch_vector(angles[0], angles[1]);
        let ports = Analyzer::from_angles(angles[2], angles[3]).ports;
        let samples: Vec<Vec<f64>> = (0..5).map(|k| self.probabilities(&input, &ports, k)).collect();
        fisher_from_stencil(self.field, self.step, &samples).expect("five finite samples")
    }

    /// Mean scattering of the input `(a, b)`.
    pub fn scattering(&self, a: f64) -> f64 {
        let w = (0.5 * a).cos().powi(2);
        w * self.scattering.single[0] + (1.0 - w) * self.scattering.single[1]
    }

    pub fn objective(&self, angles: &[f64; 4], objective: SqlObjective) -> f64 {
        let fi = self.fisher(angles).total;
        match objective {
            SqlObjective::PerPhoton => fi,
            SqlObjective::PerScatter => fi / self.scattering(angles[0]),
        }
    }
}

/// Maximizes the chosen objective over pure inputs and projective analyzers.
///
/// Restarts begin at shifted Halton points and run in parallel; the result is
/// reduced in restart order, so it does not depend on the thread count.
pub fn sql_optimize<C: Channel>(channel: &C, field: f64, objective: SqlObjective, opts: &SqlOptions) -> Result<SqlResult> {
    if opts.starts == 0 {
        return Err(Error::InvalidInput("at least one optimizer start is required".into()));
    }
    let probe = SingleProbe::new(channel, field, opts.step, opts.include_no_click)?;
    if objective == SqlObjective::PerScatter && probe.scattering.single.iter().all(|&s| s <= 0.0) {
        return Err(Error::Undefined("Fisher information per scattered photon without scattering".into()));
    }
    sql_optimize_probe(&probe, objective, opts)
}

pub fn sql_optimize_probe(probe: &SingleProbe, objective: SqlObjective, opts: &SqlOptions) -> Result<SqlResult> {
    use std::f64::consts::PI;
    let starts: Vec<[f64; 4]> = HaltonSequence::new(4, opts.seed)
        .take(opts.starts)
        .map(|u| [PI * u[0], 2.0 * PI * u[1], PI * u[2], 2.0 * PI * u[3]])
        .collect();
    let nm = NelderMeadOptions {
        step: 0.3,
        f_tol: opts.tolerance,
        x_tol: 1e-7,
        max_evals: opts.max_evaluations,
        restarts: 2,
    };
    let runs: Vec<(RestartRecord, Vec<f64>)> = starts
        .par_iter()
        .map(|s| {
            let rep = nelder_mead(
                |x| -probe.objective(&[x[0], x[1], x[2], x[3]], objective),
                s,
                &nm,
            );
            (
                RestartRecord {
                    start: *s,
                    best: -rep.value,
                    evaluations: rep.evaluations,
                    converged: rep.converged,
                },
                rep.x,
            )
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (rec, _)) in runs.iter().enumerate() {
        if rec.converged && rec.best.is_finite() && best.is_none_or(|b| rec.best > runs[b].0.best) {
            best = Some(i);
        }
    }
    let Some(bi) = best else {
        return Err(Error::NotConverged(format!(
            "no SQL restart converged at B = {} T within {} evaluations",
            probe.field, opts.max_evaluations
        )));
    };
    let x = &runs[bi].1;
    let angles = [
        x[0].rem_euclid(2.0 * PI),
        x[1].rem_euclid(2.0 * PI),
        x[2].rem_euclid(2.0 * PI),
        x[3].rem_euclid(2.0 * PI),
    ];
    let fp = probe.fisher(&angles);
    let s = probe.scattering(angles[0]);
    Ok(SqlResult {
        field: probe.field,
        objective,
        input: [angles[0], angles[1]],
        analyzer: [angles[2], angles[3]],
        fisher: fp.total,
        scattering: s,
        fisher_per_scatter: (s > 0.0).then(|| fp.total / s),
        restarts: runs.into_iter().map(|(r, _)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RotationChannel;

    #[test]
    fn lossless_rotation_limit() {
        let rate = 55.0;
        let ch = RotationChannel::lossless(rate);
        let r = sql_optimize(&ch, 0.01, SqlObjective::PerPhoton, &SqlOptions::default()).unwrap();
        assert!((r.fisher / (4.0 * rate * rate) - 1.0).abs() < 1e-8, "{}", r.fisher);
        assert!(r.fisher_per_scatter.is_none());
        assert!(sql_optimize(&ch, 0.01, SqlObjective::PerScatter, &SqlOptions::default()).is_err());
    }
}
