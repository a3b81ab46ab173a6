//! Piecewise-linear long knots in Morse position and their monotone arcs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest altitude difference treated as non-horizontal.
const FLAT: f64 = 1e-12;
/// Smallest distance between non-adjacent segments.
const CLEARANCE: f64 = 1e-9;
/// Smallest separation between two critical altitudes.
const CRITICAL_GAP: f64 = 1e-9;

/// A long knot given by the vertices `(x, y, t)` of a polygon; below the first
/// and above the last vertex it continues vertically along `z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseKnot {
    vertices: Vec<[f64; 3]>,
    critical: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct KnotJson {
    #[serde(rename = "type")]
    kind: String,
    vertices: Vec<[f64; 3]>,
}

/// Vertex indices where the altitude has a strict local extremum, with the
/// vertical rays at both ends taken into account.
fn critical_vertices(v: &[[f64; 3]]) -> Result<Vec<usize>> {
    let n = v.len();
    let mut ups = Vec::with_capacity(n + 1);
    ups.push(true);
    for k in 0..n - 1 {
        let dt = v[k + 1][2] - v[k][2];
        if dt.abs() <= FLAT {
            return Err(Error::NotMorse(format!("horizontal segment between vertices {k} and {}", k + 1)));
        }
        ups.push(dt > 0.0);
    }
    ups.push(true);
    Ok((0..n).filter(|&k| ups[k] != ups[k + 1]).collect())
}

/// Squared distance between segments `p0p1` and `q0q1` in space.
fn segment_distance2(p0: [f64; 3], p1: [f64; 3], q0: [f64; 3], q1: [f64; 3]) -> f64 {
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let (d1, d2, r) = (sub(p1, p0), sub(q1, q0), sub(p0, q0));
    let (a, e, f) = (dot(d1, d1), dot(d2, d2), dot(d2, r));
    let (c, b) = (dot(d1, r), dot(d1, d2));
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let p = [p0[0] + d1[0] * s, p0[1] + d1[1] * s, p0[2] + d1[2] * s];
    let q = [q0[0] + d2[0] * t, q0[1] + d2[1] * t, q0[2] + d2[2] * t];
    let d = sub(p, q);
    dot(d, d)
}

/// Checks that the polygon (with its end rays) does not meet itself.
fn check_embedded(v: &[[f64; 3]]) -> Result<()> {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[2]), hi.max(p[2])));
    let mut pts = Vec::with_capacity(v.len() + 2);
    pts.push([0.0, 0.0, lo - 1.0]);
    pts.extend_from_slice(v);
    pts.push([0.0, 0.0, hi + 1.0]);
    let m = pts.len() - 1;
    for i in 0..m {
        for j in i + 2..m {
            if segment_distance2(pts[i], pts[i + 1], pts[j], pts[j + 1]) < CLEARANCE * CLEARANCE {
                return Err(Error::SelfIntersection(format!("segments {i} and {j} meet")));
            }
        }
    }
    Ok(())
}

/// Validates a vertex list and returns the sorted critical altitudes.
pub fn validate_morse(vertices: &[[f64; 3]]) -> Result<Vec<f64>> {
    if vertices.len() < 2 {
        return Err(Error::Malformed("a knot needs at least two vertices".into()));
    }
    if vertices.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("non-finite coordinate".into()));
    }
    for (name, p) in [("first", vertices[0]), ("last", vertices[vertices.len() - 1])] {
        if p[0] != 0.0 || p[1] != 0.0 {
            return Err(Error::Malformed(format!("{name} vertex must lie on the axis z = 0")));
        }
    }
    let critical = critical_vertices(vertices)?;
    let mut alts: Vec<f64> = critical.iter().map(|&k| vertices[k][2]).collect();
    alts.sort_by(f64::total_cmp);
    if let Some(w) = alts.windows(2).find(|w| w[1] - w[0] < CRITICAL_GAP) {
        return Err(Error::NotMorse(format!("two critical points at altitude {}", w[0])));
    }
    check_embedded(vertices)?;
    Ok(alts)
}

impl MorseKnot {
    pub fn new(vertices: Vec<[f64; 3]>) -> Result<Self> {
        validate_morse(&vertices)?;
        let critical = critical_vertices(&vertices)?;
        Ok(Self { vertices, critical })
    }

    /// The standard line: no vertices off the axis.
    pub fn line() -> Self {
        Self::new(vec![[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).expect("the line is Morse")
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Indices of the critical vertices, in knot order.
    pub fn critical_vertices(&self) -> &[usize] {
        &self.critical
    }

    /// Sorted critical altitudes.
    pub fn critical_altitudes(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.critical.iter().map(|&k| self.vertices[k][2]).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    /// Number of critical points `c`.
    pub fn critical_count(&self) -> usize {
        self.critical.len()
    }

    /// The knot rotated by `phi` about the vertical axis.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let z = Complex64::new(v[0], v[1]) * r;
                [z.re, z.im, v[2]]
            })
            .collect();
        Self { vertices, critical: self.critical.clone() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(KnotJson { kind: "pl".into(), vertices: self.vertices.clone() }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let k: KnotJson = serde_json::from_value(v.clone())?;
        if k.kind != "pl" {
            return Err(Error::Parse(format!("unknown knot type {}", k.kind)));
        }
        Self::new(k.vertices)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}
