//! Chord diagrams on the line and their relatives.
//!
//! A [`Diagram`] stores its points as ranks `1..=q`; two diagrams are equal
//! iff their canonical encodings agree. Besides ordinary chords a diagram
//! may carry one or two V's, a four-point spanning tree, a four-edge graph
//! or a triangle together with a V. Every point is the endpoint of exactly
//! one structure.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Pos = u32;

/// Two chords `{mid, tips.0}` and `{mid, tips.1}`; `tips.0 < tips.1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vee {
    pub mid: Pos,
    pub tips: (Pos, Pos),
}

impl Vee {
    pub fn new(mid: Pos, a: Pos, b: Pos) -> Self {
        Self { mid, tips: (a.min(b), a.max(b)) }
    }

    pub fn points(&self) -> [Pos; 3] {
        let mut p = [self.mid, self.tips.0, self.tips.1];
        p.sort_unstable();
        p
    }

    pub fn chords(&self) -> [(Pos, Pos); 2] {
        [sorted_pair(self.mid, self.tips.0), sorted_pair(self.mid, self.tips.1)]
    }
}

/// A graph on four points, used both for spanning trees and for the
/// four-edge graphs. Points sorted; edges sorted pairs in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointGraph {
    pub points: Vec<Pos>,
    pub edges: Vec<(Pos, Pos)>,
}

impl PointGraph {
    /// Vertex label (1-based, by position order) of a point.
    pub fn label(&self, p: Pos) -> Option<usize> {
        self.points.iter().position(|&x| x == p).map(|i| i + 1)
    }

    pub fn degree(&self, p: Pos) -> usize {
        self.edges.iter().filter(|(a, b)| *a == p || *b == p).count()
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.points, &self.edges)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriangleVee {
    pub triangle: [Pos; 3],
    pub vee: Vee,
}

/// Diagram kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    D0,
    D1,
    D2TwoVee,
    D2Tree,
    D2TildeGraph4,
    D2TildeTriVee,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::D0 => "D0",
            Kind::D1 => "D1",
            Kind::D2TwoVee => "D2-twoVee",
            Kind::D2Tree => "D2-tree",
            Kind::D2TildeGraph4 => "D2tilde-graph4",
            Kind::D2TildeTriVee => "D2tilde-triVee",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    q: Pos,
    chords: Vec<(Pos, Pos)>,
    vees: Vec<Vee>,
    tree: Option<PointGraph>,
    graph4: Option<PointGraph>,
    triangle_vee: Option<TriangleVee>,
}

/// Structures with arbitrary real labels, before canonicalization.
#[derive(Clone, Debug, Default)]
pub struct RawDiagram {
    pub chords: Vec<(f64, f64)>,
    pub vees: Vec<(f64, f64, f64)>,
    pub tree: Option<(Vec<f64>, Vec<(f64, f64)>)>,
    pub graph4: Option<(Vec<f64>, Vec<(f64, f64)>)>,
    pub triangle_vee: Option<([f64; 3], (f64, f64, f64))>,
}

fn sorted_pair(a: Pos, b: Pos) -> (Pos, Pos) {
    (a.min(b), a.max(b))
}

fn connected(points: &[Pos], edges: &[(Pos, Pos)]) -> bool {
    let Some(&start) = points.first() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(p) = stack.pop() {
        for &(a, b) in edges {
            let other = if a == p { b } else if b == p { a } else { continue };
            if seen.insert(other) {
                stack.push(other);
            }
        }
    }
    seen.len() == points.len()
}

/// Rank-relabels the structures; the core of [`Diagram`] construction.
pub fn canonicalize(raw: &RawDiagram) -> Result<Diagram> {
    let mut all: Vec<f64> = Vec::new();
    for &(a, b) in &raw.chords {
        all.extend([a, b]);
    }
    for &(m, a, b) in &raw.vees {
        all.extend([m, a, b]);
    }
    if let Some((pts, _)) = &raw.tree {
        all.extend(pts);
    }
    if let Some((pts, _)) = &raw.graph4 {
        all.extend(pts);
    }
    if let Some((tri, (m, a, b))) = &raw.triangle_vee {
        all.extend(tri);
        all.extend([*m, *a, *b]);
    }
    if all.iter().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("non-finite position".into()));
    }
    let mut sorted = all.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePosition(w[0].to_string()));
    }
    let rank = |x: f64| -> Pos { sorted.iter().position(|&y| y == x).unwrap() as Pos + 1 };

    let chords: Vec<(Pos, Pos)> = raw.chords.iter().map(|&(a, b)| sorted_pair(rank(a), rank(b))).collect();
    let vees: Vec<Vee> = raw.vees.iter().map(|&(m, a, b)| Vee::new(rank(m), rank(a), rank(b))).collect();
    let graph = |pts: &Vec<f64>, edges: &Vec<(f64, f64)>, n_edges: usize, what: &str| -> Result<PointGraph> {
        if pts.len() != 4 || edges.len() != n_edges {
            return Err(Error::Malformed(format!("{what} needs 4 points and {n_edges} edges")));
        }
        let mut points: Vec<Pos> = pts.iter().map(|&x| rank(x)).collect();
        points.sort_unstable();
        let mut es = Vec::new();
        for &(a, b) in edges {
            if !pts.contains(&a) || !pts.contains(&b) || a == b {
                return Err(Error::Malformed(format!("{what} edge ({a},{b}) not on its points")));
            }
            es.push(sorted_pair(rank(a), rank(b)));
        }
        es.sort_unstable();
        if es.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed(format!("{what} has a repeated edge")));
        }
        let g = PointGraph { points, edges: es };
        if !g.is_connected() {
            return Err(if n_edges == 3 { Error::NotSpanning(g.points.clone()) } else {
                Error::Malformed(format!("{what} is disconnected"))
            });
        }
        Ok(g)
    };
    let tree = raw.tree.as_ref().map(|(p, e)| graph(p, e, 3, "tree")).transpose()?;
    let graph4 = raw.graph4.as_ref().map(|(p, e)| graph(p, e, 4, "graph4")).transpose()?;
    let triangle_vee = raw.triangle_vee.as_ref().map(|(t, (m, a, b))| {
        let mut tri = [rank(t[0]), rank(t[1]), rank(t[2])];
        tri.sort_unstable();
        TriangleVee { triangle: tri, vee: Vee::new(rank(*m), rank(*a), rank(*b)) }
    });
    Diagram::from_parts(all.len() as Pos, chords, vees, tree, graph4, triangle_vee)
}

impl Diagram {
    /// Builds a diagram from rank positions, validating every invariant.
    pub fn from_parts(
        q: Pos,
        mut chords: Vec<(Pos, Pos)>,
        mut vees: Vec<Vee>,
        tree: Option<PointGraph>,
        graph4: Option<PointGraph>,
        triangle_vee: Option<TriangleVee>,
    ) -> Result<Self> {
        for c in &mut chords {
            *c = sorted_pair(c.0, c.1);
        }
        chords.sort_unstable();
        vees.sort_unstable();
        let d = Self { q, chords, vees, tree, graph4, triangle_vee };
        d.validate()?;
        Ok(d)
    }

    /// Diagram whose only structures are chords on positions `1..=2k`.
    pub fn chords(chords: &[(Pos, Pos)]) -> Result<Self> {
        Self::from_parts(2 * chords.len() as Pos, chords.to_vec(), vec![], None, None, None)
    }

    pub fn with_vees(chords: &[(Pos, Pos)], vees: &[Vee]) -> Result<Self> {
        let q = 2 * chords.len() + 3 * vees.len();
        Self::from_parts(q as Pos, chords.to_vec(), vees.to_vec(), None, None, None)
    }

    pub fn with_tree(chords: &[(Pos, Pos)], points: [Pos; 4], edges: &[(Pos, Pos)]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_unstable();
        let mut es: Vec<(Pos, Pos)> = edges.iter().map(|&(a, b)| sorted_pair(a, b)).collect();
        es.sort_unstable();
        let q = 2 * chords.len() + 4;
        Self::from_parts(q as Pos, chords.to_vec(), vec![], Some(PointGraph { points: pts, edges: es }), None, None)
    }

    pub fn empty() -> Self {
        Self { q: 0, chords: vec![], vees: vec![], tree: None, graph4: None, triangle_vee: None }
    }

    fn validate(&self) -> Result<()> {
        let mut used: Vec<Pos> = Vec::new();
        for &(a, b) in &self.chords {
            if a == b {
                return Err(Error::Malformed(format!("degenerate chord ({a},{b})")));
            }
            used.extend([a, b]);
        }
        for v in &self.vees {
            used.extend(v.points());
        }
        let graph_ok = |g: &PointGraph, n: usize| -> Result<()> {
            let distinct: BTreeSet<_> = g.points.iter().collect();
            if g.points.len() != 4 || distinct.len() != 4 || g.edges.len() != n {
                return Err(Error::Malformed("graph shape".into()));
            }
            if g.edges.iter().any(|(a, b)| a == b || !g.points.contains(a) || !g.points.contains(b)) {
                return Err(Error::Malformed("graph edge off its points".into()));
            }
            let es: BTreeSet<_> = g.edges.iter().collect();
            if es.len() != n || !g.is_connected() {
                return Err(if n == 3 { Error::NotSpanning(g.points.clone()) } else {
                    Error::Malformed("graph not connected".into())
                });
            }
            Ok(())
        };
        if let Some(t) = &self.tree {
            graph_ok(t, 3)?;
            used.extend(&t.points);
        }
        if let Some(g) = &self.graph4 {
            graph_ok(g, 4)?;
            used.extend(&g.points);
        }
        if let Some(tv) = &self.triangle_vee {
            used.extend(tv.triangle);
            used.extend(tv.vee.points());
        }
        let mut sorted = used.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePosition(w[0].to_string()));
        }
        if sorted.len() != self.q as usize || sorted.iter().enumerate().any(|(i, &p)| p != i as Pos + 1) {
            return Err(Error::Malformed(format!("positions {sorted:?} are not exactly 1..={}", self.q)));
        }
        self.kind_checked().map(|_| ())
    }

    fn kind_checked(&self) -> Result<Kind> {
        let extras = usize::from(self.tree.is_some())
            + usize::from(self.graph4.is_some())
            + usize::from(self.triangle_vee.is_some());
        match (self.vees.len(), extras) {
            (0, 0) => Ok(Kind::D0),
            (1, 0) => Ok(Kind::D1),
            (2, 0) => Ok(Kind::D2TwoVee),
            (0, 1) if self.tree.is_some() => Ok(Kind::D2Tree),
            (0, 1) if self.graph4.is_some() => Ok(Kind::D2TildeGraph4),
            (0, 1) => Ok(Kind::D2TildeTriVee),
            _ => Err(Error::Malformed("unsupported combination of structures".into())),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind_checked().expect("validated on construction")
    }

    pub fn q(&self) -> Pos {
        self.q
    }

    pub fn chord_list(&self) -> &[(Pos, Pos)] {
        &self.chords
    }

    pub fn vees(&self) -> &[Vee] {
        &self.vees
    }

    pub fn tree(&self) -> Option<&PointGraph> {
        self.tree.as_ref()
    }

    pub fn graph4(&self) -> Option<&PointGraph> {
        self.graph4.as_ref()
    }

    pub fn triangle_vee(&self) -> Option<&TriangleVee> {
        self.triangle_vee.as_ref()
    }

    /// Chord count; a V counts 2, a tree 3, a four-edge graph 4, a triangle 3.
    pub fn degree(&self) -> usize {
        self.chords.len()
            + 2 * self.vees.len()
            + self.tree.as_ref().map_or(0, |_| 3)
            + self.graph4.as_ref().map_or(0, |_| 4)
            + self.triangle_vee.as_ref().map_or(0, |_| 5)
    }

    /// Flattened canonical encoding; diagrams are ordered lexicographically by it.
    pub fn encoding(&self) -> Vec<u32> {
        let mut e = vec![self.kind() as u32, self.q, self.chords.len() as u32];
        for &(a, b) in &self.chords {
            e.extend([a, b]);
        }
        e.push(self.vees.len() as u32);
        for v in &self.vees {
            e.extend([v.mid, v.tips.0, v.tips.1]);
        }
        for g in [&self.tree, &self.graph4].into_iter().flatten() {
            e.extend(&g.points);
            for &(a, b) in &g.edges {
                e.extend([a, b]);
            }
        }
        if let Some(tv) = &self.triangle_vee {
            e.extend(tv.triangle);
            e.extend([tv.vee.mid, tv.vee.tips.0, tv.vee.tips.1]);
        }
        e
    }

    /// Converts back to a raw diagram with the rank positions as labels.
    pub fn to_raw(&self) -> RawDiagram {
        let f = |p: Pos| f64::from(p);
        RawDiagram {
            chords: self.chords.iter().map(|&(a, b)| (f(a), f(b))).collect(),
            vees: self.vees.iter().map(|v| (f(v.mid), f(v.tips.0), f(v.tips.1))).collect(),
            tree: self.tree.as_ref().map(|g| {
                (g.points.iter().map(|&p| f(p)).collect(), g.edges.iter().map(|&(a, b)| (f(a), f(b))).collect())
            }),
            graph4: self.graph4.as_ref().map(|g| {
                (g.points.iter().map(|&p| f(p)).collect(), g.edges.iter().map(|&(a, b)| (f(a), f(b))).collect())
            }),
            triangle_vee: self.triangle_vee.as_ref().map(|tv| {
                (tv.triangle.map(f), (f(tv.vee.mid), f(tv.vee.tips.0), f(tv.vee.tips.1)))
            }),
        }
    }

    /// Places `self` entirely before `other`.
    pub fn juxtapose(&self, other: &Diagram) -> Result<Diagram> {
        let mut raw = self.to_raw();
        let shift = f64::from(self.q);
        let o = other.to_raw();
        raw.chords.extend(o.chords.iter().map(|&(a, b)| (a + shift, b + shift)));
        raw.vees.extend(o.vees.iter().map(|&(m, a, b)| (m + shift, a + shift, b + shift)));
        let merge = |mine: &mut Option<(Vec<f64>, Vec<(f64, f64)>)>, theirs: &Option<(Vec<f64>, Vec<(f64, f64)>)>| -> Result<()> {
            if let Some((p, e)) = theirs {
                if mine.is_some() {
                    return Err(Error::Malformed("two graphs in one diagram".into()));
                }
                *mine = Some((p.iter().map(|x| x + shift).collect(), e.iter().map(|&(a, b)| (a + shift, b + shift)).collect()));
            }
            Ok(())
        };
        merge(&mut raw.tree, &o.tree)?;
        merge(&mut raw.graph4, &o.graph4)?;
        if let Some((t, (m, a, b))) = o.triangle_vee {
            if raw.triangle_vee.is_some() {
                return Err(Error::Malformed("two triangle-V structures".into()));
            }
            raw.triangle_vee = Some((t.map(|x| x + shift), (m + shift, a + shift, b + shift)));
        }
        canonicalize(&raw)
    }

    /// Whether the ordinary chord `c` has adjacent endpoints (a local 1T chord).
    pub fn has_isolated_chord(&self) -> bool {
        self.chords.iter().any(|&(a, b)| b == a + 1)
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            q: self.q,
            chords: self.chords.iter().map(|&(a, b)| [a, b]).collect(),
            vees: self.vees.iter().map(|v| [v.mid, v.tips.0, v.tips.1]).collect(),
            tree: self.tree.as_ref().map(GraphJson::from),
            graph4: self.graph4.as_ref().map(GraphJson::from),
            triangle_vee: self.triangle_vee.as_ref().map(|tv| TriangleVeeJson {
                triangle: tv.triangle,
                vee: [tv.vee.mid, tv.vee.tips.0, tv.vee.tips.1],
            }),
        }
    }

    /// Reads a diagram, canonicalizing whatever positive labels it carries.
    pub fn from_json(j: &DiagramJson) -> Result<Self> {
        let f = |p: Pos| f64::from(p);
        let raw = RawDiagram {
            chords: j.chords.iter().map(|c| (f(c[0]), f(c[1]))).collect(),
            vees: j.vees.iter().map(|v| (f(v[0]), f(v[1]), f(v[2]))).collect(),
            tree: j.tree.as_ref().map(GraphJson::to_raw),
            graph4: j.graph4.as_ref().map(GraphJson::to_raw),
            triangle_vee: j.triangle_vee.as_ref().map(|tv| (tv.triangle.map(f), (f(tv.vee[0]), f(tv.vee[1]), f(tv.vee[2])))),
        };
        let d = canonicalize(&raw)?;
        if d.q != j.q && j.q != 0 {
            return Err(Error::Parse(format!("declared q={} but diagram has {} points", j.q, d.q)));
        }
        Ok(d)
    }
}

impl PartialOrd for Diagram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Diagram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.encoding().cmp(&other.encoding())
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_json()).map_err(|_| fmt::Error)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    pub points: Vec<Pos>,
    pub edges: Vec<[Pos; 2]>,
}

impl From<&PointGraph> for GraphJson {
    fn from(g: &PointGraph) -> Self {
        Self { points: g.points.clone(), edges: g.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl GraphJson {
    fn to_raw(&self) -> (Vec<f64>, Vec<(f64, f64)>) {
        (
            self.points.iter().map(|&p| f64::from(p)).collect(),
            self.edges.iter().map(|e| (f64::from(e[0]), f64::from(e[1]))).collect(),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TriangleVeeJson {
    pub triangle: [Pos; 3],
    pub vee: [Pos; 3],
}

/// Wire format of a diagram; `vees` entries are `[mid, tipA, tipB]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DiagramJson {
    pub q: Pos,
    #[serde(default)]
    pub chords: Vec<[Pos; 2]>,
    #[serde(default)]
    pub vees: Vec<[Pos; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<GraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph4: Option<GraphJson>,
    #[serde(default, rename = "triangleVee", skip_serializing_if = "Option::is_none")]
    pub triangle_vee: Option<TriangleVeeJson>,
}

/// Linking number of a point set with a pair: `(-1)^(#P strictly inside Q)`.
pub fn lk<T: PartialOrd + Copy>(p: &[T], q: &[T]) -> Result<i32> {
    if q.len() != 2 {
        return Err(Error::LinkingInput(format!("second argument has {} points", q.len())));
    }
    if q[0] == q[1] || p.iter().any(|x| *x == q[0] || *x == q[1]) {
        return Err(Error::LinkingInput("sets are not disjoint".into()));
    }
    let (lo, hi) = if q[0] < q[1] { (q[0], q[1]) } else { (q[1], q[0]) };
    let inside = p.iter().filter(|&&x| lo < x && x < hi).count();
    Ok(if inside % 2 == 0 { 1 } else { -1 })
}

/// The sign `S(D)`: `-1` to the number of pairs (chord, chord) or (V, chord)
/// with linking number `-1`.
pub fn sign_s(d: &Diagram) -> Result<i32> {
    if d.kind() != Kind::D1 {
        return Err(Error::WrongKind { expected: "D1".into(), got: d.kind().to_string() });
    }
    let mut negatives = 0;
    let cs = d.chord_list();
    for (i, a) in cs.iter().enumerate() {
        for b in &cs[i + 1..] {
            if lk(&[a.0, a.1], &[b.0, b.1])? < 0 {
                negatives += 1;
            }
        }
    }
    let v = d.vees()[0].points();
    for c in cs {
        if lk(&v, &[c.0, c.1])? < 0 {
            negatives += 1;
        }
    }
    Ok(if negatives % 2 == 0 { 1 } else { -1 })
}

/// `σ(D) = S(D)·D`.
pub fn sigma(d: &Diagram) -> Result<(i32, Diagram)> {
    Ok((sign_s(d)?, d.clone()))
}

/// Coefficients usable in formal sums.
pub trait Coeff: Clone + Num + std::ops::Neg<Output = Self> + fmt::Debug {}
impl<T: Clone + Num + std::ops::Neg<Output = T> + fmt::Debug> Coeff for T {}

/// Finite linear combination of diagrams. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSum<C> {
    terms: BTreeMap<Diagram, C>,
}

impl<C: Coeff> Default for FormalSum<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> FormalSum<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(d: Diagram, c: C) -> Self {
        let mut s = Self::zero();
        s.add_term(d, c);
        s
    }

    pub fn add_term(&mut self, d: Diagram, c: C) {
        let entry = self.terms.entry(d);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero();
        for (d, c) in &self.terms {
            out.add_term(d.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn coeff(&self, d: &Diagram) -> C {
        self.terms.get(d).cloned().unwrap_or_else(C::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Diagram, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some((kind, degree))` when all terms share kind and degree.
    pub fn homogeneous(&self) -> Option<(Kind, usize)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let kd = (first.kind(), first.degree());
        it.all(|d| (d.kind(), d.degree()) == kd).then_some(kd)
    }

    pub fn map_diagrams<F: FnMut(&Diagram) -> Option<(Diagram, C)>>(&self, mut f: F) -> Self {
        let mut out = Self::zero();
        for (d, c) in &self.terms {
            if let Some((d2, s)) = f(d) {
                out.add_term(d2, c.clone() * s);
            }
        }
        out
    }

    fn check_kind(&self, allowed: &[Kind]) -> Result<()> {
        for d in self.terms.keys() {
            if !allowed.contains(&d.kind()) {
                return Err(Error::WrongKind { expected: format!("{allowed:?}"), got: d.kind().to_string() });
            }
        }
        Ok(())
    }

    /// Bilinear juxtaposition `self · other`.
    pub fn juxtapose(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.juxtapose(b)?, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }
}

/// `left · mid · right` with `left`, `right` in D0 and `mid` in D1.
pub fn concat<C: Coeff>(left: &FormalSum<C>, mid: &FormalSum<C>, right: &FormalSum<C>) -> Result<FormalSum<C>> {
    left.check_kind(&[Kind::D0])?;
    right.check_kind(&[Kind::D0])?;
    mid.check_kind(&[Kind::D1])?;
    left.juxtapose(mid)?.juxtapose(right)
}

/// Product in D0.
pub fn product<C: Coeff>(a: &FormalSum<C>, b: &FormalSum<C>) -> Result<FormalSum<C>> {
    a.check_kind(&[Kind::D0])?;
    b.check_kind(&[Kind::D0])?;
    a.juxtapose(b)
}

/// All perfect matchings of `points` (sorted chords, sorted lists).
pub fn matchings(points: &[Pos]) -> Vec<Vec<(Pos, Pos)>> {
    if points.is_empty() {
        return vec![vec![]];
    }
    if points.len() % 2 == 1 {
        return vec![];
    }
    let first = points[0];
    let mut out = Vec::new();
    for i in 1..points.len() {
        let rest: Vec<Pos> = points[1..].iter().enumerate().filter(|(j, _)| j + 1 != i).map(|(_, &p)| p).collect();
        for mut m in matchings(&rest) {
            m.insert(0, (first, points[i]));
            out.push(m);
        }
    }
    out
}

/// The 16 spanning trees of the complete graph on `points` (edges sorted).
pub fn spanning_trees(points: [Pos; 4]) -> Vec<Vec<(Pos, Pos)>> {
    let all = all_pairs(&points);
    let mut out = Vec::new();
    for skip in combinations(6, 3) {
        let es: Vec<_> = skip.iter().map(|&i| all[i]).collect();
        if connected(&points, &es) {
            out.push(es);
        }
    }
    out
}

/// The 15 four-edge graphs on four points (all connected).
pub fn four_edge_graphs(points: [Pos; 4]) -> Vec<Vec<(Pos, Pos)>> {
    let all = all_pairs(&points);
    combinations(6, 4).into_iter().map(|ix| ix.iter().map(|&i| all[i]).collect()).collect()
}

fn all_pairs(points: &[Pos]) -> Vec<(Pos, Pos)> {
    let mut v = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            v.push(sorted_pair(points[i], points[j]));
        }
    }
    v.sort_unstable();
    v
}

/// Lexicographically ordered `k`-subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

const MAX_POINTS: usize = 12;

/// Exhaustive, duplicate-free, canonically ordered list of diagrams of a
/// given kind and degree.
pub fn enumerate(kind: Kind, degree: usize) -> Result<Vec<Diagram>> {
    let (core_points, core_degree) = match kind {
        Kind::D0 => (0, 0),
        Kind::D1 => (3, 2),
        Kind::D2Tree => (4, 3),
        Kind::D2TwoVee => (6, 4),
        Kind::D2TildeGraph4 => (4, 4),
        Kind::D2TildeTriVee => (6, 5),
    };
    if degree < core_degree {
        return Ok(vec![]);
    }
    let q = core_points + 2 * (degree - core_degree);
    if q > MAX_POINTS || degree > 6 {
        return Err(Error::Unsupported(format!("{kind} in degree {degree}")));
    }
    let all: Vec<Pos> = (1..=q as Pos).collect();
    let mut out = BTreeSet::new();
    let rest_of = |used: &[Pos]| -> Vec<Pos> { all.iter().copied().filter(|p| !used.contains(p)).collect() };
    let q = q as Pos;
    for core in combinations(q as usize, core_points) {
        let core: Vec<Pos> = core.iter().map(|&i| i as Pos + 1).collect();
        let rest = rest_of(&core);
        let ms = matchings(&rest);
        let mut push = |vees: Vec<Vee>, tree: Option<PointGraph>, g4: Option<PointGraph>, tv: Option<TriangleVee>| -> Result<()> {
            for m in &ms {
                out.insert(Diagram::from_parts(q, m.clone(), vees.clone(), tree.clone(), g4.clone(), tv.clone())?);
            }
            Ok(())
        };
        match kind {
            Kind::D0 => push(vec![], None, None, None)?,
            Kind::D1 => {
                for &m in &core {
                    let t: Vec<Pos> = core.iter().copied().filter(|&x| x != m).collect();
                    push(vec![Vee::new(m, t[0], t[1])], None, None, None)?;
                }
            }
            Kind::D2Tree | Kind::D2TildeGraph4 => {
                let pts = [core[0], core[1], core[2], core[3]];
                let graphs = if kind == Kind::D2Tree { spanning_trees(pts) } else { four_edge_graphs(pts) };
                for es in graphs {
                    let g = PointGraph { points: core.clone(), edges: es };
                    if kind == Kind::D2Tree {
                        push(vec![], Some(g), None, None)?;
                    } else {
                        push(vec![], None, Some(g), None)?;
                    }
                }
            }
            Kind::D2TwoVee | Kind::D2TildeTriVee => {
                for first in combinations(6, 3) {
                    let a: Vec<Pos> = first.iter().map(|&i| core[i]).collect();
                    let b: Vec<Pos> = core.iter().copied().filter(|x| !a.contains(x)).collect();
                    if kind == Kind::D2TwoVee && a[0] > b[0] {
                        continue;
                    }
                    for &mb in &b {
                        let tb: Vec<Pos> = b.iter().copied().filter(|&x| x != mb).collect();
                        let vb = Vee::new(mb, tb[0], tb[1]);
                        if kind == Kind::D2TildeTriVee {
                            push(vec![], None, None, Some(TriangleVee { triangle: [a[0], a[1], a[2]], vee: vb }))?;
                            continue;
                        }
                        for &ma in &a {
                            let ta: Vec<Pos> = a.iter().copied().filter(|&x| x != ma).collect();
                            push(vec![Vee::new(ma, ta[0], ta[1]), vb], None, None, None)?;
                        }
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// A diagram whose points are grouped into consecutive *sites*.
///
/// Sites model small disjoint intervals of the line separated by other,
/// unspecified chord endpoints; two sited diagrams are equal only if their
/// site decompositions agree. `sites[k]` is the number of points in site `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SitedDiagram {
    pub diagram: Diagram,
    pub sites: Vec<u32>,
}

impl SitedDiagram {
    pub fn new(diagram: Diagram, sites: Vec<u32>) -> Result<Self> {
        if sites.iter().sum::<u32>() != diagram.q() {
            return Err(Error::Malformed(format!("site sizes {sites:?} do not sum to q={}", diagram.q())));
        }
        Ok(Self { diagram, sites })
    }

    /// Site index (0-based) of a position.
    pub fn site_of(&self, p: Pos) -> usize {
        let mut acc = 0;
        for (k, &s) in self.sites.iter().enumerate() {
            acc += s;
            if p <= acc {
                return k;
            }
        }
        panic!("position {p} outside diagram")
    }
}

/// Truncated graded series in D0: `parts[k]` holds the degree-`k` part.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    parts: Vec<FormalSum<C>>,
}

impl<C: Coeff> Series<C> {
    pub fn one(n: usize) -> Self {
        let mut parts = vec![FormalSum::zero(); n + 1];
        parts[0] = FormalSum::term(Diagram::empty(), C::one());
        Self { parts }
    }

    /// Collects a formal sum of D0 diagrams by degree, truncating above `n`.
    pub fn from_sum(s: &FormalSum<C>, n: usize) -> Result<Self> {
        s.check_kind(&[Kind::D0])?;
        let mut parts = vec![FormalSum::zero(); n + 1];
        for (d, c) in s.iter() {
            if d.degree() <= n {
                parts[d.degree()].add_term(d.clone(), c.clone());
            }
        }
        Ok(Self { parts })
    }

    pub fn truncation(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn part(&self, k: usize) -> &FormalSum<C> {
        &self.parts[k]
    }

    pub fn constant(&self) -> C {
        self.parts[0].coeff(&Diagram::empty())
    }

    pub fn to_sum(&self) -> FormalSum<C> {
        self.parts.iter().fold(FormalSum::zero(), |acc, p| acc.add(p))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.truncation().min(other.truncation());
        let neg = C::zero() - C::one();
        Self { parts: (0..=n).map(|k| self.parts[k].add(&other.parts[k].scale(&neg))).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(FormalSum::is_empty)
    }
}

/// Graded product truncated at degree `n`.
pub fn series_mul<C: Coeff>(a: &Series<C>, b: &Series<C>, n: usize) -> Result<Series<C>> {
    let n = n.min(a.truncation()).min(b.truncation());
    let mut parts = vec![FormalSum::zero(); n + 1];
    for i in 0..=n {
        for j in 0..=n - i {
            if a.parts[i].is_empty() || b.parts[j].is_empty() {
                continue;
            }
            parts[i + j] = parts[i + j].add(&product(&a.parts[i], &b.parts[j])?);
        }
    }
    Ok(Series { parts })
}

/// Two-sided inverse up to degree `n`.
pub fn series_inv<C: Coeff>(a: &Series<C>, n: usize) -> Result<Series<C>> {
    let n = n.min(a.truncation());
    let a0 = a.constant();
    if a0.is_zero() {
        return Err(Error::NotInvertible);
    }
    let inv0 = C::one() / a0;
    let mut parts: Vec<FormalSum<C>> = vec![FormalSum::term(Diagram::empty(), inv0.clone())];
    let neg_inv0 = C::zero() - inv0;
    for k in 1..=n {
        let mut acc = FormalSum::zero();
        for j in 1..=k {
            if a.parts[j].is_empty() || parts[k - j].is_empty() {
                continue;
            }
            acc = acc.add(&product(&a.parts[j], &parts[k - j])?);
        }
        parts.push(acc.scale(&neg_inv0));
    }
    Ok(Series { parts })
}

/// `a^e` for integer `e` (negative powers through [`series_inv`]).
pub fn series_pow<C: Coeff>(a: &Series<C>, e: i32, n: usize) -> Result<Series<C>> {
    let base = if e < 0 { series_inv(a, n)? } else { a.clone() };
    let mut out = Series::one(n);
    for _ in 0..e.unsigned_abs() {
        out = series_mul(&out, &base, n)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlinalg::{qi, Q};
    use proptest::prelude::*;

    fn chords_raw(cs: &[(f64, f64)]) -> RawDiagram {
        RawDiagram { chords: cs.to_vec(), ..Default::default() }
    }

    #[test]
    fn canonicalize_relabels_ranks() {
        let d = canonicalize(&chords_raw(&[(10., 30.), (20., 40.)])).unwrap();
        assert_eq!(d.chord_list(), &[(1, 3), (2, 4)]);
        assert_eq!(d.q(), 4);
        let again = canonicalize(&d.to_raw()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn canonicalize_vee_with_chord() {
        let raw = RawDiagram { chords: vec![(2., 3.)], vees: vec![(5., 1., 9.)], ..Default::default() };
        let d = canonicalize(&raw).unwrap();
        assert_eq!(d.vees(), &[Vee::new(4, 1, 5)]);
        assert_eq!(d.chord_list(), &[(2, 3)]);
        assert_eq!(d.q(), 5);
        assert_eq!(d.kind(), Kind::D1);
        assert_eq!(d.degree(), 3);
    }

    #[test]
    fn canonicalize_errors() {
        assert!(matches!(canonicalize(&chords_raw(&[(1., 2.), (2., 3.)])), Err(Error::DuplicatePosition(_))));
        let bad_tree = RawDiagram {
            tree: Some((vec![1., 2., 3., 4.], vec![(1., 2.), (2., 1.5), (3., 4.)])),
            ..Default::default()
        };
        assert!(canonicalize(&bad_tree).is_err());
        let split = RawDiagram {
            tree: Some((vec![1., 2., 3., 4.], vec![(1., 2.), (2., 3.), (1., 3.)])),
            ..Default::default()
        };
        assert!(matches!(canonicalize(&split), Err(Error::NotSpanning(_))));
    }

    #[test]
    fn linking_numbers() {
        assert_eq!(lk(&[2, 4], &[1, 3]).unwrap(), -1);
        assert_eq!(lk(&[5, 6], &[1, 2]).unwrap(), 1);
        assert_eq!(lk(&[1, 3, 5], &[2, 6]).unwrap(), 1);
        assert!(lk(&[1, 2], &[2, 3]).is_err());
        assert!(lk(&[1], &[2, 3, 4]).is_err());
    }

    #[test]
    fn sign_examples() {
        let d = Diagram::with_vees(&[(4, 5)], &[Vee::new(2, 1, 3)]).unwrap();
        assert_eq!(sign_s(&d).unwrap(), 1);
        let d = Diagram::with_vees(&[(2, 6), (4, 7)], &[Vee::new(3, 1, 5)]);
        assert!(d.is_ok());
        let d = Diagram::from_parts(5, vec![(2, 4)], vec![Vee::new(3, 1, 5)], None, None, None).unwrap();
        assert_eq!(sign_s(&d).unwrap(), -1);
        let d = Diagram::from_parts(6, vec![(2, 6)], vec![Vee::new(3, 1, 5)], None, None, None);
        assert!(d.is_err(), "position 4 unused");
        let d = Diagram::from_parts(5, vec![(2, 5)], vec![Vee::new(3, 1, 4)], None, None, None).unwrap();
        assert_eq!(sign_s(&d).unwrap(), 1);
        assert!(sign_s(&Diagram::chords(&[(1, 2)]).unwrap()).is_err());
    }

    #[test]
    fn concat_and_product() {
        let v = FormalSum::term(Diagram::with_vees(&[], &[Vee::new(2, 1, 3)]).unwrap(), qi(1));
        let e = FormalSum::term(Diagram::empty(), qi(1));
        assert_eq!(concat(&e, &v, &e).unwrap(), v);
        let c = FormalSum::term(Diagram::chords(&[(1, 2)]).unwrap(), qi(1));
        let p = product(&c, &c).unwrap();
        assert_eq!(p.coeff(&Diagram::chords(&[(1, 2), (3, 4)]).unwrap()), qi(1));
        assert!(concat(&v, &v, &e).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(Kind::D0, 2).unwrap().len(), 3);
        assert_eq!(enumerate(Kind::D2Tree, 3).unwrap().len(), 16);
        assert_eq!(enumerate(Kind::D1, 2).unwrap().len(), 3);
        assert_eq!(enumerate(Kind::D1, 3).unwrap().len(), 30);
        assert_eq!(enumerate(Kind::D2TildeGraph4, 4).unwrap().len(), 15);
        assert_eq!(enumerate(Kind::D2TwoVee, 4).unwrap().len(), 10 * 9);
        assert!(enumerate(Kind::D0, 9).is_err());
        let d0_3 = enumerate(Kind::D0, 3).unwrap();
        assert_eq!(d0_3.len(), 15);
        assert!(d0_3.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn geometric_inverse() {
        let x = Diagram::chords(&[(1, 3), (2, 4)]).unwrap();
        let c = Q::new(3.into(), 2.into());
        let s = FormalSum::term(Diagram::empty(), qi(1)).add(&FormalSum::term(x.clone(), c.clone()));
        let a = Series::from_sum(&s, 4).unwrap();
        let inv = series_inv(&a, 4).unwrap();
        assert_eq!(inv.part(2).coeff(&x), -c.clone());
        let xx = x.juxtapose(&x).unwrap();
        assert_eq!(inv.part(4).coeff(&xx), &c * &c);
        let prod = series_mul(&a, &inv, 4).unwrap();
        assert_eq!(prod, Series::one(4));
        assert_eq!(series_mul(&Series::one(4), &a, 4).unwrap(), a);
        let zero_const = Series::from_sum(&FormalSum::term(x, qi(1)), 2).unwrap();
        assert!(matches!(series_inv(&zero_const, 2), Err(Error::NotInvertible)));
    }

    #[test]
    fn json_roundtrip() {
        let d = Diagram::with_tree(&[(1, 6)], [2, 3, 4, 5], &[(2, 3), (3, 4), (4, 5)]).unwrap();
        let j = serde_json::to_string(&d.to_json()).unwrap();
        let back: DiagramJson = serde_json::from_str(&j).unwrap();
        assert_eq!(Diagram::from_json(&back).unwrap(), d);
        let shifted = DiagramJson { q: 0, chords: vec![[10, 30], [20, 40]], ..back };
        let s = DiagramJson { tree: None, ..shifted };
        assert_eq!(Diagram::from_json(&s).unwrap().chord_list(), &[(1, 3), (2, 4)]);
    }

    fn arb_d1() -> impl Strategy<Value = Diagram> {
        (2usize..5).prop_flat_map(|m| {
            let all = enumerate(Kind::D1, m).unwrap();
            (0..all.len()).prop_map(move |i| all[i].clone())
        })
    }

    fn arb_d0() -> impl Strategy<Value = Diagram> {
        (0usize..4).prop_flat_map(|m| {
            let all = enumerate(Kind::D0, m).unwrap();
            (0..all.len()).prop_map(move |i| all[i].clone())
        })
    }

    proptest! {
        #[test]
        fn canonicalize_ignores_monotone_relabeling(d in arb_d1(), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
            let mut raw = d.to_raw();
            let f = |x: f64| x * x * x * scale + shift;
            raw.chords = raw.chords.iter().map(|&(a, b)| (f(a), f(b))).collect();
            raw.vees = raw.vees.iter().map(|&(m, a, b)| (f(m), f(a), f(b))).collect();
            prop_assert_eq!(canonicalize(&raw).unwrap(), d);
        }

        #[test]
        fn sigma_is_involution(d in arb_d1()) {
            let (s1, d1) = sigma(&d).unwrap();
            let (s2, d2) = sigma(&d1).unwrap();
            prop_assert_eq!(s1 * s2, 1);
            prop_assert_eq!(d2, d);
        }

        #[test]
        fn lk_reflection_invariant(p in proptest::collection::btree_set(0i32..30, 1..6), a in 0i32..30, b in 0i32..30) {
            prop_assume!(a != b && !p.contains(&a) && !p.contains(&b));
            let pv: Vec<i32> = p.iter().copied().collect();
            let refl: Vec<i32> = pv.iter().map(|x| 100 - x).collect();
            prop_assert_eq!(lk(&pv, &[a, b]).unwrap(), lk(&refl, &[100 - a, 100 - b]).unwrap());
        }

        #[test]
        fn concat_grading_and_associativity(a in arb_d0(), v in arb_d1(), b in arb_d0()) {
            let fa = FormalSum::term(a.clone(), qi(2));
            let fv = FormalSum::term(v.clone(), qi(-1));
            let fb = FormalSum::term(b.clone(), qi(3));
            let out = concat(&fa, &fv, &fb).unwrap();
            for (d, _) in out.iter() {
                prop_assert_eq!(d.degree(), a.degree() + v.degree() + b.degree());
            }
            let left = fa.juxtapose(&fv).unwrap().juxtapose(&fb).unwrap();
            let right = fa.juxtapose(&fv.juxtapose(&fb).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
