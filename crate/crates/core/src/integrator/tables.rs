//! Lookup tables from the combinatorial data of a pairing (which arcs carry
//! which points, and the relative order of the levels) to the index of the
//! normal-form diagram and the accumulated sign.
//!
//! A point on arc `k` at relative level `h` is placed on the line at
//! `4k + 2 ± h` (`+` on increasing arcs), which realizes the order induced by
//! the knot's orientation: arcs follow each other, and along a decreasing arc
//! higher points come first.

use crate::diagrams::{canonicalize, Diagram, Kind, RawDiagram};
use crate::error::Result;

use super::normal::{normal_form, Basis};

/// Whether diagrams are reduced modulo 2T or only pruned by 1T.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    /// Normal form modulo 1T and 2T; the integrand is summed per class.
    TwoTerm,
    /// Only 1T pruning: every V-diagram is kept on its own.
    None,
}

/// Output basis for a grouping in degrees `2..=max_degree`.
pub fn output_basis(kind: Kind, max_degree: usize, grouping: Grouping) -> Result<Basis> {
    let lo = if kind == Kind::D0 { 0 } else { 2 };
    match grouping {
        Grouping::TwoTerm => Basis::of_representatives(kind, lo..=max_degree),
        Grouping::None => {
            let mut all = Vec::new();
            for m in lo..=max_degree {
                all.extend(crate::diagrams::enumerate(kind, m)?.into_iter().filter(|d| !d.has_isolated_chord()));
            }
            Ok(Basis::new(all))
        }
    }
}

/// Position of a point on the line.
fn label(up: &[bool], arc: usize, h: f64) -> f64 {
    4.0 * arc as f64 + 2.0 + if up[arc] { h } else { -h }
}

/// Index in `basis` and sign (including `(−1)^{points on decreasing arcs}`)
/// of the diagram with the given chords and V, or `None` if it vanishes.
fn entry(
    basis: &Basis,
    grouping: Grouping,
    up: &[bool],
    chords: &[((usize, f64), (usize, f64))],
    vee: Option<[(usize, f64); 3]>,
) -> Option<(u32, f64)> {
    let mut raw = RawDiagram::default();
    let mut down = 0;
    for &((a, ha), (b, hb)) in chords {
        raw.chords.push((label(up, a, ha), label(up, b, hb)));
        down += usize::from(!up[a]) + usize::from(!up[b]);
    }
    if let Some([(m, hm), (p, hp), (q, hq)]) = vee {
        raw.vees.push((label(up, m, hm), label(up, p, hp), label(up, q, hq)));
        down += usize::from(!up[m]) + usize::from(!up[p]) + usize::from(!up[q]);
    }
    let d: Diagram = canonicalize(&raw).expect("distinct labels");
    let ori = if down % 2 == 0 { 1.0 } else { -1.0 };
    match grouping {
        Grouping::TwoTerm => {
            let (rep, s) = normal_form(&d)?;
            basis.get(&rep).map(|i| (i as u32, ori * f64::from(s)))
        }
        Grouping::None => {
            if d.has_isolated_chord() {
                return None;
            }
            basis.get(&d).map(|i| (i as u32, ori))
        }
    }
}

/// Tables for one frame topology (number of arcs and their directions).
pub struct Tables {
    pub n: usize,
    /// `(m, p, q)`: V alone.
    vee: Vec<Option<(u32, f64)>>,
    /// `(face, m, p, q, c, d)`: V at one level and a chord `{c, d}` above
    /// (face 0) or below (face 1).
    vee_chord: Vec<Option<(u32, f64)>>,
    /// `(a, b, c, d)`: chord `{a, b}` below chord `{c, d}`.
    two_chords: Vec<Option<(u32, f64)>>,
}

impl Tables {
    /// Tables for V-diagram integrals (`kind = D1`) or the Kontsevich
    /// integral (`kind = D0`).
    pub fn new(up: &[bool], basis: &Basis, grouping: Grouping, kind: Kind, max_degree: usize) -> Self {
        let n = up.len();
        let mut t = Self { n, vee: vec![], vee_chord: vec![], two_chords: vec![] };
        if kind == Kind::D1 {
            t.vee = vec![None; n * n * n];
            for (m, p, q) in triples(n) {
                t.vee[(m * n + p) * n + q] = entry(basis, grouping, up, &[], Some([(m, 0.0), (p, 0.0), (q, 0.0)]));
            }
            if max_degree >= 3 {
                t.vee_chord = vec![None; 2 * n.pow(5)];
                for face in 0..2 {
                    let h = if face == 0 { 1.0 } else { -1.0 };
                    for (m, p, q) in triples(n) {
                        for c in 0..n {
                            for d in c + 1..n {
                                let i = t.vc_index(face, m, p, q, c, d);
                                t.vee_chord[i] = entry(
                                    basis,
                                    grouping,
                                    up,
                                    &[((c, h), (d, h))],
                                    Some([(m, 0.0), (p, 0.0), (q, 0.0)]),
                                );
                            }
                        }
                    }
                }
            }
        } else if max_degree >= 2 {
            t.two_chords = vec![None; n.pow(4)];
            for a in 0..n {
                for b in a + 1..n {
                    for c in 0..n {
                        for d in c + 1..n {
                            t.two_chords[((a * n + b) * n + c) * n + d] =
                                entry(basis, grouping, up, &[((a, 0.0), (b, 0.0)), ((c, 1.0), (d, 1.0))], None);
                        }
                    }
                }
            }
        }
        t
    }

    fn vc_index(&self, face: usize, m: usize, p: usize, q: usize, c: usize, d: usize) -> usize {
        let n = self.n;
        ((((face * n + m) * n + p) * n + q) * n + c) * n + d
    }

    /// V with mid `m` and tips `p < q`.
    pub fn vee(&self, m: usize, p: usize, q: usize) -> Option<(u32, f64)> {
        self.vee[(m * self.n + p) * self.n + q]
    }

    /// V at one level with a chord `c < d` above (`face = 0`) or below
    /// (`face = 1`).
    pub fn vee_chord(&self, face: usize, m: usize, p: usize, q: usize, c: usize, d: usize) -> Option<(u32, f64)> {
        self.vee_chord[self.vc_index(face, m, p, q, c, d)]
    }

    /// Chord `a < b` below chord `c < d`.
    pub fn two_chords(&self, a: usize, b: usize, c: usize, d: usize) -> Option<(u32, f64)> {
        let n = self.n;
        self.two_chords[((a * n + b) * n + c) * n + d]
    }
}

/// Every V on three distinct arcs as `(mid, tip, tip)` with tips increasing.
pub fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                out.extend([(x, y, z), (y, x, z), (z, x, y)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_increasing_strands_give_the_degree_two_class() {
        let up = [true, true, true];
        let basis = output_basis(Kind::D1, 2, Grouping::TwoTerm).unwrap();
        let t = Tables::new(&up, &basis, Grouping::TwoTerm, Kind::D1, 2);
        // positions 1,2,3: mids 1, 2, 3 carry signs +, −, +
        assert_eq!(t.vee(0, 1, 2), Some((0, 1.0)));
        assert_eq!(t.vee(1, 0, 2), Some((0, -1.0)));
        assert_eq!(t.vee(2, 0, 1), Some((0, 1.0)));
    }

    #[test]
    fn decreasing_arcs_flip_signs() {
        let up = [true, false, true];
        let basis = output_basis(Kind::D1, 2, Grouping::TwoTerm).unwrap();
        let t = Tables::new(&up, &basis, Grouping::TwoTerm, Kind::D1, 2);
        assert_eq!(t.vee(0, 1, 2), Some((0, -1.0)));
    }

    #[test]
    fn crossing_is_the_only_surviving_two_chord_pattern() {
        // a single hump: arcs up, down, up
        let up = [true, false, true];
        let basis = output_basis(Kind::D0, 2, Grouping::TwoTerm).unwrap();
        let t = Tables::new(&up, &basis, Grouping::TwoTerm, Kind::D0, 2);
        let x = basis.get(&Diagram::chords(&[(1, 3), (2, 4)]).unwrap()).unwrap() as u32;
        // lower chord {0,1}, upper chord {1,2}: points 0@0 < 1@1 < 1@0 < 2@1
        assert_eq!(t.two_chords(0, 1, 1, 2), Some((x, 1.0)));
        // lower {1,2}, upper {0,1}: 0@1, 1@1, 1@0, 2@0 → nested chords, 1T
        assert_eq!(t.two_chords(1, 2, 0, 1), None);
    }
}
