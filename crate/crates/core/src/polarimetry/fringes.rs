//! Field scans of detection rates, fringe extrema, periods and visibilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::povm::Analyzer;
use super::probabilities::Measurement;
use super::state::{SinglePhotonState, TwoPhotonState};
use crate::channel::Channel;
use crate::grid::validate_grid;
use crate::optimize::refine_extremum;
use crate::{Error, Result};

/// One field point of a fringe scan. Fields in tesla, rates in 1/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeRow {
    pub field: f64,
    pub p_hh: f64,
    pub p_hv: f64,
    pub p_vv: f64,
    /// Singles of a reference photon through the same cell, H and V ports.
    pub p_h: Option<f64>,
    pub p_v: Option<f64>,
    pub r_hh: f64,
    pub r_hv: f64,
    pub r_vv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeTable {
    /// Input pair flux, 1/s.
    pub flux: f64,
    pub rows: Vec<FringeRow>,
}

impl FringeTable {
    pub fn column(&self, f: impl Fn(&FringeRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn fields(&self) -> Vec<f64> {
        self.column(|r| r.field)
    }

    /// CSV with header `B_mT,P_HH,P_HV,P_VV,P_H,P_V,R_HH,R_HV,R_VV`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["B_mT", "P_HH", "P_HV", "P_VV", "P_H", "P_V", "R_HH", "R_HV", "R_VV"];
        w.write_record(header).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                fmt(r.field * 1e3),
                fmt(r.p_hh),
                fmt(r.p_hv),
                fmt(r.p_vv),
                opt(r.p_h),
                opt(r.p_v),
                fmt(r.r_hh),
                fmt(r.r_hv),
                fmt(r.r_vv),
            ])
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Internal(e.to_string()))
    }
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv: {e}"))
}

/// Rates `R_i = flux * P_i` for pairs over a field grid, plus H/V singles
/// probabilities of `singles` when given.
pub fn fringe_scan<C: Channel>(
    state: &TwoPhotonState,
    channel: &C,
    grid: &[f64],
    flux: f64,
    singles: Option<&SinglePhotonState>,
) -> Result<FringeTable> {
    validate_grid(grid)?;
    if !(flux.is_finite() && flux > 0.0) {
        return Err(Error::InvalidInput(format!("input flux {flux} must be positive")));
    }
    let pair = Measurement::pair(state);
    let single = singles.map(|s| Measurement::single(s, &Analyzer::horizontal_vertical()));
    let rows = grid
        .par_iter()
        .map(|&b| {
            let t = channel.coefficients(b)?;
            let p = pair.probabilities_for(&t);
            let s = single.as_ref().map(|m| m.probabilities_for(&t));
            Ok(FringeRow {
                field: b,
                p_hh: p[0],
                p_hv: p[1],
                p_vv: p[2],
                p_h: s.as_ref().map(|s| s[0]),
                p_v: s.as_ref().map(|s| s[1]),
                r_hh: flux * p[0],
                r_hv: flux * p[1],
                r_vv: flux * p[2],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeTable { flux, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub field: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Extrema of a fringe signal over a field window, with the window's range of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeAnalysis {
    pub extrema: Vec<Extremum>,
    pub max: f64,
    pub min: f64,
}

impl FringeAnalysis {
    /// `(max - min) / (max + min)` over the window.
    pub fn visibility(&self) -> f64 {
        if self.max + self.min <= 0.0 {
            0.0
        } else {
            (self.max - self.min) / (self.max + self.min)
        }
    }

    /// Twice the mean spacing of consecutive extrema; `None` with fewer than two.
    pub fn period(&self) -> Option<f64> {
        let n = self.extrema.len();
        if n < 2 {
            return None;
        }
        Some(2.0 * (self.extrema[n - 1].field - self.extrema[0].field) / (n - 1) as f64)
    }
}

/// Locates and refines the extrema of `signal` sampled on `grid`.
///
/// Interior extrema are grid points beyond both neighbours, refined by golden
/// section between them. A window edge counts as an extremum when the parabola
/// through the three edge samples has its vertex within two grid steps of it;
/// its location is refined in that neighbourhood, which may lie just outside
/// the window.
pub fn analyze_fringe<F>(signal: F, grid: &[f64]) -> Result<FringeAnalysis>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    validate_grid(grid)?;
    if grid.len() < 3 {
        return Err(Error::InvalidInput("fringe analysis needs at least 3 grid points".into()));
    }
    let values = grid.par_iter().map(|&b| signal(b)).collect::<Result<Vec<f64>>>()?;
    let n = grid.len();
    let (lo, hi) = (grid[0], grid[n - 1]);
    let eval = |b: f64| signal(b).unwrap_or(f64::NAN);
    let tol = 1e-10 * (hi - lo);

    let mut extrema = Vec::new();
    for i in 1..n - 1 {
        let (a, v, c) = (values[i - 1], values[i], values[i + 1]);
        let kind = if v > a && v >= c {
            ExtremumKind::Maximum
        } else if v < a && v <= c {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        let (field, value) = refine_extremum(eval, grid[i - 1], grid[i + 1], kind == ExtremumKind::Maximum, tol);
        extrema.push(Extremum { field, value, kind });
    }

    let mut edge = |idx: [usize; 3], at_start: bool| {
        let x = idx.map(|i| grid[i]);
        let y = idx.map(|i| values[i]);
        let Some((vertex, curvature)) = parabola_vertex(x, y) else { return };
        let h = (x[1] - x[0]).abs().max((x[2] - x[1]).abs());
        let e = x[0];
        if (vertex - e).abs() > 2.0 * h || curvature == 0.0 {
            return;
        }
        if extrema.iter().any(|x: &Extremum| (x.field - e).abs() <= 2.0 * h) {
            return;
        }
        let maximize = curvature < 0.0;
        let (field, value) = refine_extremum(eval, e - 2.0 * h, e + 2.0 * h, maximize, tol);
        let kind = if maximize { ExtremumKind::Maximum } else { ExtremumKind::Minimum };
        let ex = Extremum { field, value, kind };
        if at_start {
            extrema.insert(0, ex);
        } else {
            extrema.push(ex);
        }
    };
    edge([0, 1, 2], true);
    edge([n - 1, n - 2, n - 3], false);

    let inside = extrema
        .iter()
        .filter(|e| e.field >= lo && e.field <= hi)
        .map(|e| e.value)
        .filter(|v| v.is_finite());
    let all: Vec<f64> = values.iter().copied().chain(inside).collect();
    let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    if extrema.iter().any(|e| !e.value.is_finite()) {
        return Err(Error::NonFinite("fringe signal".into()));
    }
    Ok(FringeAnalysis { extrema, max, min })
}

/// Vertex abscissa and second-derivative sign of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    // y = y0 + d01 (x - x0) + a (x - x0)(x - x1)
    let b = d01 - a * (x[0] + x[1]);
    Some((-b / (2.0 * a), a))
}

/// Post-selected fraction of one pair outcome (0 = HH, 1 = HV, 2 = VV) among
/// detected coincidences through `channel`.
pub fn pair_signal<'a, C: Channel>(
    state: &TwoPhotonState,
    channel: &'a C,
    outcome: usize,
) -> impl Fn(f64) -> Result<f64> + Sync + 'a {
    let m = Measurement::pair(state);
    move |b| {
        let p = m.probabilities_for(&channel.coefficients(b)?);
        Ok(p[outcome] / (p[0] + p[1] + p[2]))
    }
}

/// V-port fraction of the detected singles of `photon` through `channel`.
pub fn singles_signal<'a, C: Channel>(
    photon: &SinglePhotonState,
    channel: &'a C,
) -> impl Fn(f64) -> Result<f64> + Sync + 'a {
    let m = Measurement::single(photon, &Analyzer::horizontal_vertical());
    move |b| {
        let p = m.probabilities_for(&channel.coefficients(b)?);
        Ok(p[1] / (p[0] + p[1]))
    }
}
