//! Paths in the space of Morse knots: rigid rotations about the vertical axis
//! and piecewise-linear interpolation between keyframes.

use std::f64::consts::TAU;

use serde_json::{json, Value};

use super::frame::Frame;
use super::knot::MorseKnot;
use crate::error::{Error, Result};

/// Intermediate knots checked per keyframe interval.
const SAMPLES_PER_INTERVAL: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum KnotPath {
    /// `z(φ, t) = z(0, t)·e^{i·sense·φ}` for `φ ∈ [0, 2π]`.
    Rotation { knot: MorseKnot, sense: f64 },
    /// Linear interpolation of matched vertices between consecutive frames,
    /// frame `k` sitting at parameter `times[k]`.
    Keyframes { frames: Vec<MorseKnot>, times: Vec<f64> },
}

impl KnotPath {
    /// One full turn of `knot` about its axis.
    pub fn rotation(knot: MorseKnot) -> Self {
        KnotPath::Rotation { knot, sense: 1.0 }
    }

    /// Keyframes evenly spread over `[a, b]`.
    pub fn keyframes(frames: Vec<MorseKnot>, range: (f64, f64)) -> Result<Self> {
        let n = frames.len();
        if n < 2 {
            return Err(Error::Malformed("a keyframe path needs at least two frames".into()));
        }
        let times = (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect();
        Self::keyframes_at(frames, times)
    }

    /// Keyframes at explicit increasing parameter values.
    pub fn keyframes_at(frames: Vec<MorseKnot>, times: Vec<f64>) -> Result<Self> {
        if frames.len() < 2 || frames.len() != times.len() {
            return Err(Error::Malformed("keyframes and times must match and number at least two".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Malformed("keyframe times must increase".into()));
        }
        let nv = frames[0].vertices().len();
        if frames.iter().any(|f| f.vertices().len() != nv) {
            return Err(Error::Malformed("keyframes must have the same number of vertices".into()));
        }
        let c = frames[0].critical_count();
        if let Some(k) = frames.iter().position(|f| f.critical_count() != c) {
            return Err(Error::Perestroika(times[k]));
        }
        let path = KnotPath::Keyframes { frames, times };
        path.validate()?;
        Ok(path)
    }

    /// Parameter interval.
    pub fn range(&self) -> (f64, f64) {
        match self {
            KnotPath::Rotation { .. } => (0.0, TAU),
            KnotPath::Keyframes { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    /// Parameter values where the path may have a corner.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            KnotPath::Rotation { .. } => vec![0.0, TAU],
            KnotPath::Keyframes { times, .. } => times.clone(),
        }
    }

    pub fn critical_count(&self) -> usize {
        match self {
            KnotPath::Rotation { knot, .. } => knot.critical_count(),
            KnotPath::Keyframes { frames, .. } => frames[0].critical_count(),
        }
    }

    fn interval(times: &[f64], phi: f64) -> usize {
        (times.partition_point(|&s| s <= phi).max(1) - 1).min(times.len() - 2)
    }

    /// Vertices at `phi` and their derivatives along the path.
    fn vertices_at(&self, phi: f64) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        match self {
            KnotPath::Rotation { knot, sense } => {
                let k = knot.rotated(sense * phi);
                let vel = k.vertices().iter().map(|v| [-sense * v[1], sense * v[0], 0.0]).collect();
                (k.vertices().to_vec(), vel)
            }
            KnotPath::Keyframes { frames, times } => {
                let i = Self::interval(times, phi);
                let len = times[i + 1] - times[i];
                let s = (phi - times[i]) / len;
                let (a, b) = (frames[i].vertices(), frames[i + 1].vertices());
                let verts = a.iter().zip(b).map(|(p, q)| std::array::from_fn(|c| p[c] + s * (q[c] - p[c]))).collect();
                let vel = a.iter().zip(b).map(|(p, q)| std::array::from_fn(|c| (q[c] - p[c]) / len)).collect();
                (verts, vel)
            }
        }
    }

    /// The knot at parameter `phi`.
    pub fn knot_at(&self, phi: f64) -> Result<MorseKnot> {
        match self {
            KnotPath::Rotation { knot, sense } => Ok(knot.rotated(sense * phi)),
            KnotPath::Keyframes { .. } => MorseKnot::new(self.vertices_at(phi).0),
        }
    }

    /// The frame (arcs with φ-derivatives) at parameter `phi`.
    pub fn frame(&self, phi: f64) -> Result<Frame> {
        let (verts, vel) = self.vertices_at(phi);
        let knot = match self {
            KnotPath::Rotation { knot, sense } => knot.rotated(sense * phi),
            KnotPath::Keyframes { .. } => self.checked_knot(verts, phi)?,
        };
        Ok(Frame::new(&knot, &vel))
    }

    fn base_critical(&self) -> &[usize] {
        match self {
            KnotPath::Rotation { knot, .. } => knot.critical_vertices(),
            KnotPath::Keyframes { frames, .. } => frames[0].critical_vertices(),
        }
    }

    fn checked_knot(&self, verts: Vec<[f64; 3]>, phi: f64) -> Result<MorseKnot> {
        let k = MorseKnot::new(verts)?;
        if k.critical_count() != self.critical_count() {
            return Err(Error::Perestroika(phi));
        }
        if k.critical_vertices() != self.base_critical() {
            return Err(Error::NotMorse(format!("critical points jump between vertices near phi = {phi}")));
        }
        Ok(k)
    }

    /// Checks that every sampled intermediate knot is Morse with the same
    /// critical structure.
    pub fn validate(&self) -> Result<()> {
        if let KnotPath::Keyframes { times, .. } = self {
            for w in times.windows(2) {
                for j in 0..=SAMPLES_PER_INTERVAL {
                    let phi = w[0] + (w[1] - w[0]) * j as f64 / SAMPLES_PER_INTERVAL as f64;
                    self.checked_knot(self.vertices_at(phi).0, phi)?;
                }
            }
        }
        Ok(())
    }

    /// The same path run backwards.
    pub fn reversed(&self) -> Self {
        match self {
            KnotPath::Rotation { knot, sense } => {
                KnotPath::Rotation { knot: knot.rotated(sense * TAU), sense: -sense }
            }
            KnotPath::Keyframes { frames, times } => {
                let (a, b) = (times[0], times[times.len() - 1]);
                KnotPath::Keyframes {
                    frames: frames.iter().rev().cloned().collect(),
                    times: times.iter().rev().map(|t| a + b - t).collect(),
                }
            }
        }
    }

    /// `self` followed by `other` (keyframe paths whose endpoints agree).
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let (KnotPath::Keyframes { frames: f1, times: t1 }, KnotPath::Keyframes { frames: f2, times: t2 }) = (self, other)
        else {
            return Err(Error::Unsupported("concatenation of rotation paths".into()));
        };
        if f1[f1.len() - 1] != f2[0] {
            return Err(Error::Malformed("paths do not share an endpoint".into()));
        }
        let shift = t1[t1.len() - 1] - t2[0];
        let mut frames = f1.clone();
        frames.extend(f2[1..].iter().cloned());
        let mut times = t1.clone();
        times.extend(t2[1..].iter().map(|t| t + shift));
        Self::keyframes_at(frames, times)
    }

    pub fn to_json(&self) -> Value {
        match self {
            KnotPath::Rotation { knot, sense } => json!({"type": "rotation", "knot": knot.to_json(), "sense": sense}),
            KnotPath::Keyframes { frames, times } => json!({
                "type": "keyframes",
                "frames": frames.iter().map(MorseKnot::to_json).collect::<Vec<_>>(),
                "range": [times[0], times[times.len() - 1]],
                "times": times,
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v.get("type").and_then(Value::as_str).ok_or_else(|| Error::Parse("path without type".into()))?;
        match kind {
            "rotation" => {
                let knot = MorseKnot::from_json(v.get("knot").ok_or_else(|| Error::Parse("rotation without knot".into()))?)?;
                let sense = v.get("sense").and_then(Value::as_f64).unwrap_or(1.0);
                Ok(KnotPath::Rotation { knot, sense })
            }
            "keyframes" => {
                let frames = v
                    .get("frames")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("keyframes without frames".into()))?
                    .iter()
                    .map(MorseKnot::from_json)
                    .collect::<Result<Vec<_>>>()?;
                if let Some(times) = v.get("times") {
                    return Self::keyframes_at(frames, serde_json::from_value(times.clone())?);
                }
                let range: (f64, f64) = match v.get("range") {
                    Some(r) => serde_json::from_value(r.clone())?,
                    None => (0.0, 1.0),
                };
                Self::keyframes(frames, range)
            }
            other => Err(Error::Parse(format!("unknown path type {other}"))),
        }
    }
}
