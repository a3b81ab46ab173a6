//! The 1-cocycle integral of a path of Morse knots in degrees 2 and 3.
//!
//! On the face `t_i = t_{i+1}` of the simplex the two forms of a V share the
//! altitude `s`; after the face sign the density is
//! `(B_{mp}·A_{mq} − A_{mp}·B_{mq})·∏ A` where `A = ∂_t log Δ`,
//! `B = ∂_φ log Δ` and the V has mid `m` and tips `p < q`. In degree 3 the
//! extra chord is integrated in closed form over its altitude (above the V on
//! the first face, below it on the second), the altitude `s` of the V
//! adaptively, and the path parameter adaptively on the outside.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;

use super::frame::Frame;
use super::pairlog::PairLogs;
use super::path::KnotPath;
use super::quadrature::{clip_breaks, Adaptive, Estimate, QuadratureConfig, Rule};
use super::tables::{output_basis, Grouping, Tables};
use super::vector::NumericVector;
use crate::diagrams::Kind;
use crate::error::{Error, Result};

/// Share of the tolerance given to the inner integrals.
const INNER_SHARE: f64 = 0.1;

/// Evaluation options beyond the quadrature configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Z1Options {
    pub grouping: Grouping,
    /// Restricts every level to this altitude range.
    pub window: Option<(f64, f64)>,
    /// Leaves out V altitudes within this distance of a critical altitude.
    pub cutoff: f64,
    pub parallel: bool,
}

impl Default for Z1Options {
    fn default() -> Self {
        Self { grouping: Grouping::TwoTerm, window: None, cutoff: 0.0, parallel: true }
    }
}

/// `A` and `B` for every ordered pair of arcs alive at one altitude.
struct Derivatives {
    n: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl Derivatives {
    fn new(frame: &Frame, alive: &[usize], s: f64) -> Self {
        let n = frame.arcs.len();
        let zero = Complex64::new(0.0, 0.0);
        let (mut a, mut b) = (vec![zero; n * n], vec![zero; n * n]);
        let states: Vec<_> = alive.iter().map(|&k| frame.arcs[k].eval(s)).collect();
        for (i, &x) in alive.iter().enumerate() {
            for (j, &y) in alive.iter().enumerate() {
                if i != j {
                    let d = states[i].z - states[j].z;
                    a[x * n + y] = (states[i].zt - states[j].zt) / d;
                    b[x * n + y] = (states[i].zp - states[j].zp) / d;
                }
            }
        }
        Self { n, a, b }
    }

    /// `B_{mp}·A_{mq} − A_{mp}·B_{mq}`.
    fn vee(&self, m: usize, p: usize, q: usize) -> Complex64 {
        let (mp, mq) = (m * self.n + p, m * self.n + q);
        self.b[mp] * self.a[mq] - self.a[mp] * self.b[mq]
    }
}

/// Closed-form integral of a chord's form above or below `s`; `Err(())` when
/// it diverges at an end where the two arcs meet.
type ChordIntegral = Option<std::result::Result<Complex64, ()>>;

fn chord_integrals(frame: &Frame, logs: &PairLogs, s: f64, window: (f64, f64)) -> Vec<[ChordIntegral; 2]> {
    let n = frame.arcs.len();
    let mut out = vec![[None, None]; n * n];
    for c in 0..n {
        for d in c + 1..n {
            let Some(p) = logs.get(c, d) else { continue };
            let lo = p.lo.max(window.0);
            let hi = p.hi.min(window.1);
            let integral = |from: f64, to: f64| -> ChordIntegral {
                if from >= to {
                    return None;
                }
                if (from == p.lo && p.meets_lo) || (to == p.hi && p.meets_hi) {
                    return Some(Err(()));
                }
                Some(Ok(p.increment(frame, from, to)))
            };
            out[c * n + d] = [integral(lo.max(s), hi), integral(lo, hi.min(s))];
        }
    }
    out
}

struct Integrand<'a> {
    tables: Tables,
    dim: usize,
    max_degree: usize,
    window: (f64, f64),
    options: &'a Z1Options,
    norm: [Complex64; 2],
}

impl Integrand<'_> {
    /// Normalized density at altitude `s` of the V level.
    fn slice(&self, frame: &Frame, logs: &PairLogs, s: f64, failure: &Mutex<Option<Error>>) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        let alive: Vec<usize> = frame.alive(s).collect();
        if alive.len() < 3 {
            return out;
        }
        let der = Derivatives::new(frame, &alive, s);
        let chords = if self.max_degree >= 3 { chord_integrals(frame, logs, s, self.window) } else { vec![] };
        let n = self.tables.n;
        for (i, &x) in alive.iter().enumerate() {
            for (j, &y) in alive.iter().enumerate().skip(i + 1) {
                for &z in &alive[j + 1..] {
                    for (m, p, q) in [(x, y, z), (y, x, z), (z, x, y)] {
                        let dens = der.vee(m, p, q);
                        if let Some((idx, sign)) = self.tables.vee(m, p, q) {
                            out[idx as usize] += dens * (sign * self.norm[0]);
                        }
                        if self.max_degree < 3 {
                            continue;
                        }
                        for c in 0..n {
                            for d in c + 1..n {
                                for face in 0..2 {
                                    let Some(integral) = chords[c * n + d][face] else { continue };
                                    let Some((idx, sign)) = self.tables.vee_chord(face, m, p, q, c, d) else { continue };
                                    match integral {
                                        Ok(v) => out[idx as usize] += dens * v * (sign * self.norm[1]),
                                        Err(()) => {
                                            failure.lock().expect("unpoisoned").get_or_insert(Error::Quadrature(format!(
                                                "divergent chord between arcs {c} and {d} survived 1T at altitude {s}"
                                            )));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn check_degree(max_degree: usize) -> Result<()> {
    if !(2..=3).contains(&max_degree) {
        return Err(Error::Unsupported(format!("1-cocycle integral of degree {max_degree} (2 or 3)")));
    }
    Ok(())
}

/// The integral in the basis of the chosen grouping (normal forms modulo
/// 1T/2T, or every V-diagram surviving 1T).
pub fn z1_with(path: &KnotPath, max_degree: usize, quad: &QuadratureConfig, options: &Z1Options) -> Result<NumericVector> {
    check_degree(max_degree)?;
    quad.validate()?;
    path.validate()?;
    let basis = output_basis(Kind::D1, max_degree, options.grouping)?;
    let dim = basis.len();
    let (a, b) = path.range();
    let frame0 = path.frame(a)?;
    if path.critical_count() == 0 || frame0.arcs.len() < 3 {
        // A single strand: no pairing exists.
        return Ok(NumericVector::zero(Kind::D1, max_degree));
    }
    let up: Vec<bool> = frame0.arcs.iter().map(|x| x.up).collect();
    let tables = Tables::new(&up, &basis, options.grouping, Kind::D1, max_degree);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let integrand = Integrand {
        tables,
        dim,
        max_degree,
        window: options.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY)),
        options,
        norm: [two_pi_i.powi(-2), two_pi_i.powi(-3)],
    };
    let failure = Mutex::new(None);
    let rule = Rule::new(quad.order);
    let inner_tol = INNER_SHARE * quad.tol / (b - a);
    let per_phi = |phi: f64| -> Estimate {
        let frame = match path.frame(phi) {
            Ok(f) => f,
            Err(e) => {
                failure.lock().expect("unpoisoned").get_or_insert(e);
                return Estimate::zeros(dim);
            }
        };
        let logs = PairLogs::new(&frame);
        let (mut lo, mut hi) = frame.span();
        let crit: Vec<f64> = frame.arcs.iter().flat_map(|x| [x.lo, x.hi]).filter(|t| t.is_finite()).collect();
        if let Some((w0, w1)) = options.window {
            lo = lo.max(w0);
            hi = hi.min(w1);
        }
        if lo >= hi {
            return Estimate::zeros(dim);
        }
        let cut = integrand.options.cutoff;
        let extra = crit.iter().flat_map(|&t| [t - cut, t + cut]);
        let breaks = clip_breaks(frame.breakpoints.iter().copied().chain(extra), lo, hi);
        let f = |s: f64| {
            if cut > 0.0 && crit.iter().any(|&t| (s - t).abs() < cut) {
                return Estimate::zeros(dim);
            }
            Estimate::exact(integrand.slice(&frame, &logs, s, &failure))
        };
        Adaptive { f: &f, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: false }.integrate(
            &breaks,
            inner_tol,
            false,
        )
    };
    let outer = Adaptive { f: &per_phi, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: options.parallel };
    let est = outer.integrate(&path.breaks(), (1.0 - INNER_SHARE) * quad.tol, options.parallel);
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    if est.max_err() > quad.tol {
        return Err(Error::Quadrature(format!("error estimate {:.3e} above tolerance {:.1e}", est.max_err(), quad.tol)));
    }
    Ok(NumericVector::from_estimate(Kind::D1, max_degree, &basis, &est))
}

/// `Z¹(path)` up to degree `max_degree ∈ {2, 3}`, as the representative
/// orthogonal to every relator.
pub fn z1(path: &KnotPath, max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    z1_with(path, max_degree, quad, &Z1Options::default())?.canonical()
}

/// `Z¹` with every level restricted to the altitude window `[t0, t1]`.
pub fn z1_window(path: &KnotPath, window: (f64, f64), max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    z1_with(path, max_degree, quad, &Z1Options { window: Some(window), ..Default::default() })?.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::knot::MorseKnot;

    fn hump(dx: f64) -> MorseKnot {
        MorseKnot::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 2.0], [0.5 + dx, 1.0, 1.0], [-1.0, 0.5, 3.0], [0.0, 0.0, 4.0]])
            .unwrap()
    }

    fn quad() -> QuadratureConfig {
        QuadratureConfig { tol: 1e-7, ..Default::default() }
    }

    #[test]
    fn constant_path_gives_exact_zero() {
        let path = KnotPath::keyframes(vec![hump(0.0), hump(0.0)], (0.0, 1.0)).unwrap();
        let v = z1_with(&path, 3, &quad(), &Z1Options::default()).unwrap();
        assert!(v.iter().all(|(_, c, _)| c == Complex64::new(0.0, 0.0)), "{v:?}");
    }

    #[test]
    fn reversal_negates() {
        let path = KnotPath::keyframes(vec![hump(0.0), hump(0.4)], (0.0, 1.0)).unwrap();
        let f = z1(&path, 3, &quad()).unwrap();
        let b = z1(&path.reversed(), 3, &quad()).unwrap();
        let sum = f.combine(1.0, &b, 1.0).unwrap();
        assert!(sum.max_abs() < 1e-6, "{sum:?}");
    }

    #[test]
    fn sequential_matches_parallel() {
        let path = KnotPath::keyframes(vec![hump(0.0), hump(0.3)], (0.0, 1.0)).unwrap();
        let opts = Z1Options { parallel: false, ..Default::default() };
        let seq = z1_with(&path, 3, &quad(), &opts).unwrap();
        let par = z1_with(&path, 3, &quad(), &Z1Options::default()).unwrap();
        assert!(seq.combine(1.0, &par, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn rotating_a_monotone_line_gives_zero() {
        let v = z1(&KnotPath::rotation(MorseKnot::line()), 3, &quad()).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn degree_outside_two_and_three_is_rejected() {
        let path = KnotPath::rotation(hump(0.0));
        assert!(matches!(z1(&path, 1, &quad()), Err(Error::Unsupported(_))));
        assert!(matches!(z1(&path, 4, &quad()), Err(Error::Unsupported(_))));
    }
}
