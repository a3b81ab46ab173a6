//! The rotation loop `rot(K)` and a reduced evaluation of `Z¹(rot(K))`.
//!
//! Along `z_i(φ, t) = z_i(0, t)·e^{iφ}` every form becomes
//! `∂_t log(z_i − z_j) dt + i dφ`, so the V density is
//! `i·(A_{mq} − A_{mp})·∏ A` and the `φ` integral contributes `2πi`. What is
//! left is an integral over altitudes alone, evaluated here in the opposite
//! order from [`super::z1`]: the V level in closed form through continuous
//! logarithms, the chord level (degree 3) numerically. Logarithms of the
//! vanishing difference at a critical point are grouped symbolically per
//! normal form and must cancel exactly.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::frame::Frame;
use super::knot::MorseKnot;
use super::pairlog::PairLogs;
use super::path::KnotPath;
use super::quadrature::{clip_breaks, Adaptive, Estimate, QuadratureConfig, Rule};
use super::tables::{output_basis, triples, Grouping, Tables};
use super::vector::NumericVector;
use crate::diagrams::Kind;
use crate::error::{Error, Result};

/// The Gramain loop: one full turn of `knot` about its axis.
pub fn gramain(knot: MorseKnot) -> KnotPath {
    KnotPath::rotation(knot)
}

/// `log(z_x − z_y)` at an end of a V's range: a finite value or the symbol of
/// a critical point where the two arcs meet.
#[derive(Clone, Copy)]
enum EndLog {
    Finite(Complex64),
    Meeting { x: usize, y: usize, bits: u64 },
}

/// One V with its common altitude range and the logarithms of its two pairs
/// at both ends.
struct VeeRange {
    m: usize,
    p: usize,
    q: usize,
    lo: f64,
    hi: f64,
    /// `[pair (m,q), pair (m,p)] × [lo, hi]`.
    ends: [[EndLog; 2]; 2],
}

fn end_log(frame: &Frame, logs: &PairLogs, x: usize, y: usize, t: f64) -> EndLog {
    let l = logs.get(x, y).expect("arcs of a V overlap").eval(frame, t);
    if l.re.is_finite() {
        EndLog::Finite(l)
    } else {
        EndLog::Meeting { x: x.min(y), y: x.max(y), bits: t.to_bits() }
    }
}

fn vee_ranges(frame: &Frame, logs: &PairLogs) -> Vec<VeeRange> {
    let arcs = &frame.arcs;
    triples(arcs.len())
        .into_iter()
        .filter_map(|(m, p, q)| {
            let lo = arcs[m].lo.max(arcs[p].lo).max(arcs[q].lo);
            let hi = arcs[m].hi.min(arcs[p].hi).min(arcs[q].hi);
            (lo < hi).then(|| VeeRange {
                m,
                p,
                q,
                lo,
                hi,
                ends: [
                    [end_log(frame, logs, m, q, lo), end_log(frame, logs, m, q, hi)],
                    [end_log(frame, logs, m, p, lo), end_log(frame, logs, m, p, hi)],
                ],
            })
        })
        .collect()
}

/// Accumulates `coeff·log(...)` terms per output index, keeping the symbols of
/// vanishing differences apart so that their cancellation can be checked.
struct Accumulator {
    value: Vec<Complex64>,
    symbols: HashMap<(usize, usize, usize, usize, usize, u64), f64>,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Self { value: vec![Complex64::new(0.0, 0.0); dim], symbols: HashMap::new() }
    }

    /// Adds `weight·sign·log` at `idx`; `chord` tags symbols by the chord
    /// whose form multiplies them.
    fn add(&mut self, idx: usize, chord: (usize, usize), weight: Complex64, sign: f64, log: EndLog) {
        match log {
            EndLog::Finite(l) => self.value[idx] += weight * l * sign,
            EndLog::Meeting { x, y, bits } => {
                *self.symbols.entry((idx, chord.0, chord.1, x, y, bits)).or_insert(0.0) += sign;
            }
        }
    }

    fn finish(self) -> Result<Vec<Complex64>> {
        if let Some(((_, _, _, x, y, bits), _)) = self.symbols.iter().find(|(_, c)| **c != 0.0) {
            return Err(Error::Quadrature(format!(
                "logarithm of the meeting of arcs {x} and {y} at altitude {} does not cancel",
                f64::from_bits(*bits)
            )));
        }
        Ok(self.value)
    }
}

/// Degree 2: `Σ ± (Λ_{mq} − Λ_{mp})` over the whole range of every V.
fn degree_two(vees: &[VeeRange], tables: &Tables, dim: usize) -> Result<Vec<Complex64>> {
    let mut acc = Accumulator::new(dim);
    let one = Complex64::new(1.0, 0.0);
    for v in vees {
        let Some((idx, sign)) = tables.vee(v.m, v.p, v.q) else { continue };
        let idx = idx as usize;
        for (pair, s) in [(0, 1.0), (1, -1.0)] {
            acc.add(idx, (0, 0), one, sign * s, v.ends[pair][1]);
            acc.add(idx, (0, 0), one, -sign * s, v.ends[pair][0]);
        }
    }
    acc.finish()
}

/// Degree 3 density at chord altitude `u`: `Σ A_{cd}(u)·(±)(Λ_{mq} − Λ_{mp})`
/// with the V below the chord (`s < u`) or above it (`s > u`).
fn degree_three_density(
    frame: &Frame,
    logs: &PairLogs,
    vees: &[VeeRange],
    tables: &Tables,
    dim: usize,
    u: f64,
) -> Result<Vec<Complex64>> {
    let mut acc = Accumulator::new(dim);
    let alive: Vec<usize> = frame.alive(u).collect();
    let states: Vec<_> = alive.iter().map(|&k| frame.arcs[k].eval(u)).collect();
    let moving = |x: usize, y: usize| EndLog::Finite(logs.get(x, y).expect("alive arcs overlap").eval(frame, u));
    for (i, &c) in alive.iter().enumerate() {
        for (j, &d) in alive.iter().enumerate().skip(i + 1) {
            let a_cd = (states[i].zt - states[j].zt) / (states[i].z - states[j].z);
            for v in vees {
                let pairs = [(v.m, v.q), (v.m, v.p)];
                // face 0: chord above, V on [lo, min(u, hi)]
                if v.lo < u {
                    if let Some((idx, sign)) = tables.vee_chord(0, v.m, v.p, v.q, c, d) {
                        for (k, s) in [(0, 1.0), (1, -1.0)] {
                            let top = if u < v.hi { moving(pairs[k].0, pairs[k].1) } else { v.ends[k][1] };
                            acc.add(idx as usize, (c, d), a_cd, sign * s, top);
                            acc.add(idx as usize, (c, d), a_cd, -sign * s, v.ends[k][0]);
                        }
                    }
                }
                // face 1: chord below, V on [max(u, lo), hi]
                if u < v.hi {
                    if let Some((idx, sign)) = tables.vee_chord(1, v.m, v.p, v.q, c, d) {
                        for (k, s) in [(0, 1.0), (1, -1.0)] {
                            let bottom = if v.lo < u { moving(pairs[k].0, pairs[k].1) } else { v.ends[k][0] };
                            acc.add(idx as usize, (c, d), a_cd, sign * s, v.ends[k][1]);
                            acc.add(idx as usize, (c, d), a_cd, -sign * s, bottom);
                        }
                    }
                }
            }
        }
    }
    acc.finish()
}

/// `Z¹(rot(k))` up to degree `max_degree ∈ {2, 3}` evaluated after the
/// rotation angle has been integrated out, as the representative orthogonal
/// to every relator.
pub fn reduced_gramain_oracle(knot: &MorseKnot, max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    if !(2..=3).contains(&max_degree) {
        return Err(Error::Unsupported(format!("reduced rotation integral of degree {max_degree} (2 or 3)")));
    }
    quad.validate()?;
    if knot.critical_count() == 0 {
        return Ok(NumericVector::zero(Kind::D1, max_degree));
    }
    let basis = output_basis(Kind::D1, max_degree, Grouping::TwoTerm)?;
    let dim = basis.len();
    let frame = Frame::at_rest(knot);
    let logs = PairLogs::new(&frame);
    let up: Vec<bool> = frame.arcs.iter().map(|a| a.up).collect();
    let tables = Tables::new(&up, &basis, Grouping::TwoTerm, Kind::D1, max_degree);
    let vees = vee_ranges(&frame, &logs);
    // (2πi)^{−k} for k forms, times the 2πi of the rotation angle.
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut est = Estimate::exact(degree_two(&vees, &tables, dim)?);
    est.scale(two_pi_i.powi(-1));
    if max_degree == 3 {
        let norm = two_pi_i.powi(-2);
        let failure = std::sync::Mutex::new(None);
        let f = |u: f64| match degree_three_density(&frame, &logs, &vees, &tables, dim, u) {
            Ok(v) => Estimate::exact(v),
            Err(e) => {
                failure.lock().expect("unpoisoned").get_or_insert(e);
                Estimate::zeros(dim)
            }
        };
        let (lo, hi) = frame.span();
        let breaks = clip_breaks(frame.breakpoints.iter().copied(), lo, hi);
        let rule = Rule::new(quad.order);
        let adaptive = Adaptive { f: &f, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: false };
        let mut upper = adaptive.integrate(&breaks, quad.tol / norm.norm(), crate::par::available());
        if let Some(e) = failure.into_inner().expect("unpoisoned") {
            return Err(e);
        }
        upper.scale(norm);
        est.add_scaled(1.0, &upper);
    }
    if est.max_err() > quad.tol {
        return Err(Error::Quadrature(format!("error estimate {:.3e} above tolerance {:.1e}", est.max_err(), quad.tol)));
    }
    NumericVector::from_estimate(Kind::D1, max_degree, &basis, &est).canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::correction::hump;
    use crate::integrator::kontsevich::{crossing, kontsevich_z};
    use crate::integrator::z1::z1;

    fn quad() -> QuadratureConfig {
        QuadratureConfig { tol: 1e-8, ..Default::default() }
    }

    #[test]
    fn straight_line_gives_zero() {
        assert!(reduced_gramain_oracle(&MorseKnot::line(), 3, &quad()).unwrap().is_empty());
    }

    #[test]
    fn agrees_with_the_full_integral_on_the_hump() {
        let o = reduced_gramain_oracle(&hump(), 3, &quad()).unwrap();
        let coarse = QuadratureConfig { tol: 1e-7, ..Default::default() };
        let z = z1(&gramain(hump()), 3, &coarse).unwrap();
        for m in 2..=3 {
            for (a, b) in o.weight_values(m).unwrap().iter().zip(z.weight_values(m).unwrap()) {
                assert!((a.0 - b.0).norm() < 1e-6, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn weight_values_are_multiples_of_the_crossing_coefficient() {
        let k = hump();
        let x = kontsevich_z(&k, 2, &quad()).unwrap().coeff(&crossing());
        let o = reduced_gramain_oracle(&k, 3, &quad()).unwrap();
        let mut nonzero = 0;
        for (w, _) in o.weight_values(3).unwrap() {
            let r = w / x;
            let n = r.re.round();
            assert!((r - n).norm() < 1e-9, "{w} / {x}");
            nonzero += usize::from(n != 0.0);
        }
        assert!(nonzero > 0);
    }
}
