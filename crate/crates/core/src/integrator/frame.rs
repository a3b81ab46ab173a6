//! A knot of a path at one parameter value, cut into monotone arcs, with the
//! parameter derivative of every vertex.

use num_complex::Complex64;

use super::knot::MorseKnot;

/// A vertex and its derivative along the path parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingVertex {
    pub t: f64,
    pub z: Complex64,
    pub dt: f64,
    pub dz: Complex64,
}

/// Position of a point of an arc at a given altitude, with `∂z/∂t` and
/// `∂z/∂φ` at fixed altitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState {
    pub z: Complex64,
    pub zt: Complex64,
    pub zp: Complex64,
}

/// A maximal monotone piece of the knot between two critical points (or a
/// critical point and infinity).
#[derive(Clone, Debug)]
pub struct Arc {
    /// Whether the knot's orientation goes upwards along the arc.
    pub up: bool,
    pub lo: f64,
    pub hi: f64,
    /// Vertices sorted by increasing altitude.
    verts: Vec<MovingVertex>,
}

impl Arc {
    /// Whether altitude `t` lies strictly inside the arc.
    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }

    /// Vertex altitudes of the arc.
    pub fn altitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.verts.iter().map(|v| v.t)
    }

    pub fn eval(&self, t: f64) -> PointState {
        let first = &self.verts[0];
        let last = &self.verts[self.verts.len() - 1];
        // Vertical rays at the two ends of the knot.
        if t <= first.t {
            return PointState { z: first.z, zt: Complex64::new(0.0, 0.0), zp: first.dz };
        }
        if t >= last.t {
            return PointState { z: last.z, zt: Complex64::new(0.0, 0.0), zp: last.dz };
        }
        let k = self.verts.partition_point(|v| v.t <= t) - 1;
        let (a, b) = (&self.verts[k], &self.verts[k + 1]);
        let len = b.t - a.t;
        let u = (t - a.t) / len;
        let dzs = b.z - a.z;
        let du = (-a.dt * len - (t - a.t) * (b.dt - a.dt)) / (len * len);
        PointState { z: a.z + dzs * u, zt: dzs / len, zp: a.dz + (b.dz - a.dz) * u + dzs * du }
    }
}

/// All arcs of one knot of a path, in knot order, plus the sorted vertex
/// altitudes.
#[derive(Clone, Debug)]
pub struct Frame {
    pub arcs: Vec<Arc>,
    pub breakpoints: Vec<f64>,
}

impl Frame {
    /// Builds the frame of `knot` whose vertices move with `velocities`
    /// (`(dx, dy, dt)` per vertex).
    pub fn new(knot: &MorseKnot, velocities: &[[f64; 3]]) -> Self {
        let v = knot.vertices();
        let moving: Vec<MovingVertex> = v
            .iter()
            .zip(velocities)
            .map(|(p, d)| MovingVertex {
                t: p[2],
                z: Complex64::new(p[0], p[1]),
                dt: d[2],
                dz: Complex64::new(d[0], d[1]),
            })
            .collect();
        let n_arcs = knot.critical_count() + 1;
        let mut arcs = Vec::with_capacity(n_arcs);
        let crit = knot.critical_vertices();
        for k in 0..n_arcs {
            let start = if k == 0 { 0 } else { crit[k - 1] };
            let end = if k == n_arcs - 1 { v.len() - 1 } else { crit[k] };
            let up = k % 2 == 0;
            let mut verts: Vec<MovingVertex> = moving[start..=end].to_vec();
            if !up {
                verts.reverse();
            }
            let lo = if k == 0 { f64::NEG_INFINITY } else { verts[0].t };
            let hi = if k == n_arcs - 1 { f64::INFINITY } else { verts[verts.len() - 1].t };
            arcs.push(Arc { up, lo, hi, verts });
        }
        let mut breakpoints: Vec<f64> = v.iter().map(|p| p[2]).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Self { arcs, breakpoints }
    }

    /// A knot at rest.
    pub fn at_rest(knot: &MorseKnot) -> Self {
        Self::new(knot, &vec![[0.0; 3]; knot.vertices().len()])
    }

    /// Arcs alive at altitude `t`.
    pub fn alive(&self, t: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.arcs.len()).filter(move |&k| self.arcs[k].contains(t))
    }

    /// Common open altitude range of two arcs, if non-empty.
    pub fn overlap(&self, a: usize, b: usize) -> Option<(f64, f64)> {
        let lo = self.arcs[a].lo.max(self.arcs[b].lo);
        let hi = self.arcs[a].hi.min(self.arcs[b].hi);
        (lo < hi).then_some((lo, hi))
    }

    /// Lowest and highest vertex altitude.
    pub fn span(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.breakpoints.len() - 1])
    }
}
