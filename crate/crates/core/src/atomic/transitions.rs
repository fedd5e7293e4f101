//! Electric-dipole sigma+/sigma- transitions between field-dressed D1 levels.
//!
//! Strengths are in units of the squared reduced dipole element and include
//! a uniform ground-state population `1 / (2(2I+1))`. With that weighting the
//! total strength for each circular polarization is 1/3 at every field.

use serde::{Deserialize, Serialize};

use super::levels::{diagonalize_levels, LevelDiagram, Manifold};
use crate::constants::IsotopeConstants;
use crate::Result;

/// Squared Clebsch-Gordan coefficient for a circular J=1/2 -> J'=1/2 component.
pub const CIRCULAR_CG_SQUARED: f64 = 2.0 / 3.0;

const STRENGTH_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Absolute transition frequency, Hz.
    pub frequency: f64,
    /// Frequency relative to the isotope's D1 centroid, Hz.
    pub offset: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub ground: usize,
    pub excited: usize,
}

/// Amplitude `<e| d_q |g>` in units of the reduced dipole element, `q = +1`
/// for sigma+ (absorption raises m_J) and `q = -1` for sigma-.
pub fn circular_amplitude(ground: &LevelDiagram, excited: &LevelDiagram, g: usize, e: usize, q: i32) -> f64 {
    let ni = ground.basis.len() / 2;
    let cg = CIRCULAR_CG_SQUARED.sqrt();
    let gv = &ground.levels[g].vector;
    let ev = &excited.levels[e].vector;
    // m_J = -1/2 occupies indices 0..ni, m_J = +1/2 occupies ni..2ni.
    let (from, to) = if q > 0 { (0, ni) } else { (ni, 0) };
    (0..ni).map(|k| ev[to + k] * gv[from + k]).sum::<f64>() * cg
}

pub fn transition_table(iso: &IsotopeConstants, field: f64) -> Result<Vec<Transition>> {
    let ground = diagonalize_levels(iso, Manifold::Ground, field)?;
    let excited = diagonalize_levels(iso, Manifold::Excited, field)?;
    Ok(transitions_between(&ground, &excited))
}

pub fn transitions_between(ground: &LevelDiagram, excited: &LevelDiagram) -> Vec<Transition> {
    let population = 1.0 / ground.len() as f64;
    let mut out = Vec::new();
    for (g, lg) in ground.levels.iter().enumerate() {
        for (e, le) in excited.levels.iter().enumerate() {
            let dm = le.m_f - lg.m_f;
            let (plus, minus) = if (dm - 1.0).abs() < 1e-9 {
                (circular_amplitude(ground, excited, g, e, 1).powi(2) * population, 0.0)
            } else if (dm + 1.0).abs() < 1e-9 {
                (0.0, circular_amplitude(ground, excited, g, e, -1).powi(2) * population)
            } else {
                continue;
            };
            if plus.max(minus) < STRENGTH_FLOOR {
                continue;
            }
            let offset = le.energy - lg.energy;
            out.push(Transition {
                frequency: excited.centroid - ground.centroid + offset,
                offset,
                sigma_plus: plus,
                sigma_minus: minus,
                ground: g,
                excited: e,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Isotope;

    fn distinct(mut f: Vec<f64>, tol: f64) -> Vec<f64> {
        f.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for x in f {
            if out.last().is_none_or(|l| (x - l).abs() > tol) {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn rb87_zero_field_has_four_lines() {
        let iso = Isotope::Rb87.constants();
        let t = transition_table(iso, 0.0).unwrap();
        let lines = distinct(t.iter().map(|x| x.frequency).collect(), 1e3);
        assert_eq!(lines.len(), 4);
        let f22 = iso.d1_line(2.0, 2.0);
        let f21 = iso.d1_line(2.0, 1.0);
        assert!(lines.iter().any(|x| (x - f22).abs() < 1.0));
        assert!(lines.iter().any(|x| (x - f21).abs() < 1.0));
        assert!(((f22 - f21) - 2.0 * iso.a_hfs_excited).abs() < 1e-3);
    }

    #[test]
    fn sum_rule_is_field_independent() {
        for iso in Isotope::ALL {
            let total = |b: f64| {
                let t = transition_table(iso.constants(), b).unwrap();
                (
                    t.iter().map(|x| x.sigma_plus).sum::<f64>(),
                    t.iter().map(|x| x.sigma_minus).sum::<f64>(),
                )
            };
            let (p0, m0) = total(0.0);
            let (p1, m1) = total(0.05);
            assert!((p0 - p1).abs() / p0 < 1e-9);
            assert!((m0 - m1).abs() / m0 < 1e-9);
            assert!((p0 - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_strengths_are_polarization_symmetric() {
        let t = transition_table(Isotope::Rb85.constants(), 0.0).unwrap();
        let plus: f64 = t.iter().map(|x| x.sigma_plus).sum();
        let minus: f64 = t.iter().map(|x| x.sigma_minus).sum();
        assert!((plus - minus).abs() < 1e-14);
    }
}
