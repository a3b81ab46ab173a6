//! The Kontsevich integral of a Morse knot up to degree 2.
//!
//! Degree 1 vanishes by 1T. In degree 2 the lower chord is integrated in
//! closed form with continuous logarithms and the upper level numerically.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::frame::Frame;
use super::knot::MorseKnot;
use super::pairlog::PairLogs;
use super::quadrature::{clip_breaks, Adaptive, Estimate, QuadratureConfig, Rule};
use super::tables::{output_basis, Grouping, Tables};
use super::vector::NumericVector;
use crate::diagrams::{Diagram, Kind};
use crate::error::{Error, Result};

/// Integrand over the upper level `t` of the degree-2 term, before the
/// `(2πi)^{-2}` normalization.
fn degree_two_density(frame: &Frame, logs: &PairLogs, tables: &Tables, dim: usize, t: f64) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    let alive: Vec<usize> = frame.alive(t).collect();
    let states: Vec<_> = alive.iter().map(|&k| frame.arcs[k].eval(t)).collect();
    for (ic, &c) in alive.iter().enumerate() {
        for (id, &d) in alive.iter().enumerate().skip(ic + 1) {
            let a_cd = (states[ic].zt - states[id].zt) / (states[ic].z - states[id].z);
            for a in 0..tables.n {
                for b in a + 1..tables.n {
                    let Some((idx, sign)) = tables.two_chords(a, b, c, d) else { continue };
                    let Some(p) = logs.get(a, b) else { continue };
                    if t <= p.lo {
                        continue;
                    }
                    let top = t.min(p.hi);
                    let inner = p.increment(frame, p.lo, top);
                    if !inner.re.is_finite() {
                        return Err(Error::Quadrature(format!(
                            "divergent chord between arcs {a} and {b} survived 1T"
                        )));
                    }
                    out[idx as usize] += a_cd * inner * sign;
                }
            }
        }
    }
    Ok(out)
}

/// `Z(k)` up to degree `max_degree ≤ 2`, pruned by 1T.
pub fn kontsevich_z(knot: &MorseKnot, max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    kontsevich_z_with(knot, max_degree, quad, true)
}

/// [`kontsevich_z`] with explicit choice of parallel evaluation.
pub fn kontsevich_z_with(
    knot: &MorseKnot,
    max_degree: usize,
    quad: &QuadratureConfig,
    parallel: bool,
) -> Result<NumericVector> {
    quad.validate()?;
    if max_degree > 2 {
        return Err(Error::Unsupported(format!("Kontsevich integral of degree {max_degree} (at most 2)")));
    }
    let basis = output_basis(Kind::D0, max_degree, Grouping::TwoTerm)?;
    let mut out = NumericVector::zero(Kind::D0, max_degree);
    out.add_term(Diagram::empty(), Complex64::new(1.0, 0.0), 0.0);
    if max_degree < 2 || knot.critical_count() == 0 {
        return Ok(out);
    }
    let frame = Frame::at_rest(knot);
    let logs = PairLogs::new(&frame);
    let up: Vec<bool> = frame.arcs.iter().map(|a| a.up).collect();
    let tables = Tables::new(&up, &basis, Grouping::TwoTerm, Kind::D0, max_degree);
    let norm = Complex64::new(0.0, 2.0 * PI).powi(-2);
    let dim = basis.len();
    let failure = std::sync::Mutex::new(None);
    let f = |t: f64| match degree_two_density(&frame, &logs, &tables, dim, t) {
        Ok(v) => Estimate::exact(v),
        Err(e) => {
            failure.lock().expect("unpoisoned").get_or_insert(e);
            Estimate::exact(vec![Complex64::new(0.0, 0.0); dim])
        }
    };
    let (lo, hi) = frame.span();
    let breaks = clip_breaks(frame.breakpoints.iter().copied(), lo, hi);
    let rule = Rule::new(quad.order);
    let adaptive = Adaptive { f: &f, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: false };
    let mut est = adaptive.integrate(&breaks, quad.tol / norm.norm(), parallel);
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    est.scale(norm);
    if est.max_err() > quad.tol {
        return Err(Error::Quadrature(format!("error estimate {:.3e} above tolerance {:.1e}", est.max_err(), quad.tol)));
    }
    for (i, d) in basis.diagrams.iter().enumerate() {
        if d.degree() > 0 {
            out.add_term(d.clone(), est.value[i], est.err[i]);
        }
    }
    Ok(out)
}

/// The degree-2 crossing diagram `{1,3}{2,4}`.
pub fn crossing() -> Diagram {
    Diagram::chords(&[(1, 3), (2, 4)]).expect("valid diagram")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_unknot_is_one() {
        let z = kontsevich_z(&MorseKnot::line(), 2, &QuadratureConfig::default()).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.coeff(&Diagram::empty()), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn hump_crossing_coefficient_is_real() {
        let hump =
            MorseKnot::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 2.0], [0.5, 1.0, 1.0], [-1.0, 0.5, 3.0], [0.0, 0.0, 4.0]])
                .unwrap();
        let quad = QuadratureConfig { tol: 1e-9, ..Default::default() };
        let z = kontsevich_z(&hump, 2, &quad).unwrap();
        let a = z.coeff(&crossing());
        assert!(a.im.abs() <= 10.0 * z.err(&crossing()).max(1e-12), "{a}");
        assert!(a.re.is_finite());
        let seq = kontsevich_z_with(&hump, 2, &quad, false).unwrap();
        assert_eq!(seq, z);
    }
}
