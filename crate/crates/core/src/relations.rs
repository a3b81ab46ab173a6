//! Desingularisations of V²-diagrams and the relation families on V-diagrams.
//!
//! Local expansions are produced as [`SignedTerm`]s carrying the *site*
//! structure of the result (which two points came from the split vertex), so
//! that expansions in a local configuration can be compared column by column
//! before they are embedded into concrete diagrams.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_traits::Zero;

use serde::{Deserialize, Serialize};

use crate::diagrams::{
    canonicalize, enumerate, lk, Diagram, DiagramJson, FormalSum, Kind, PointGraph, Pos, RawDiagram, SitedDiagram, Vee,
};
use crate::error::{Error, Result};
use crate::ratlinalg::{fmt_q, kernel_basis, parse_q, qi, SparseRationalMatrix, Q};

/// Which copy of a split vertex comes first on the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitOrder {
    /// The copy carrying the lone edge (or the first tip) comes first.
    Before,
    After,
}

/// One summand of a desingularisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTerm {
    pub coefficient: Q,
    pub diagram: SitedDiagram,
}

/// Offset used to split a point into two adjacent copies.
const SPLIT: f64 = 0.25;

fn sited_after_split(raw: &RawDiagram, split_at: f64) -> Result<SitedDiagram> {
    let d = canonicalize(raw)?;
    let mut all: Vec<f64> = Vec::new();
    for &(a, b) in &raw.chords {
        all.extend([a, b]);
    }
    for &(m, a, b) in &raw.vees {
        all.extend([m, a, b]);
    }
    let first = all.iter().filter(|&&x| x < split_at).count() as u32;
    let mut sites = vec![1u32; d.q() as usize - 1];
    sites[first as usize] = 2;
    SitedDiagram::new(d, sites)
}

fn raw_chords(d: &Diagram) -> Vec<(f64, f64)> {
    d.chord_list().iter().map(|&(a, b)| (f64::from(a), f64::from(b))).collect()
}

/// Splits vertex `k` (1-based label by position) of the tree of `d`.
///
/// The copy carrying `lone_edge` becomes an endpoint of an ordinary chord,
/// the other copy keeps the remaining edges, which must form a V together
/// with the rest of the tree.
pub fn split_tree_vertex(d: &Diagram, k: usize, lone_edge: (Pos, Pos), order: SplitOrder) -> Result<SignedTerm> {
    let tree = d.tree().ok_or_else(|| Error::WrongKind { expected: "D2-tree".into(), got: d.kind().to_string() })?;
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidSplit(format!("vertex label {k} out of range")));
    }
    let pk = tree.points[k - 1];
    let lone = (lone_edge.0.min(lone_edge.1), lone_edge.0.max(lone_edge.1));
    if !tree.edges.contains(&lone) || (lone.0 != pk && lone.1 != pk) {
        return Err(Error::InvalidSplit(format!("edge {lone:?} is not a tree edge at vertex {k}")));
    }
    let u = if lone.0 == pk { lone.1 } else { lone.0 };
    if tree.degree(pk) < 2 || tree.degree(u) != 1 {
        return Err(Error::InvalidSplit(format!("splitting vertex {k} along {lone:?} does not leave a V")));
    }
    let (lone_pos, rest_pos) = match order {
        SplitOrder::Before => (f64::from(pk) - SPLIT, f64::from(pk) + SPLIT),
        SplitOrder::After => (f64::from(pk) + SPLIT, f64::from(pk) - SPLIT),
    };
    let at = |p: Pos| if p == pk { rest_pos } else { f64::from(p) };
    let rest: Vec<(f64, f64)> = tree.edges.iter().filter(|&&e| e != lone).map(|&(a, b)| (at(a), at(b))).collect();
    let vee = vee_from_edges(rest[0], rest[1]);
    let chord = (lone_pos, f64::from(u));
    let sign = if k.is_multiple_of(2) { 1 } else { -1 } * lk(&[vee.0, vee.1, vee.2], &[chord.0, chord.1])?;
    let mut chords = raw_chords(d);
    chords.push(chord);
    let raw = RawDiagram { chords, vees: vec![vee], ..Default::default() };
    Ok(SignedTerm { coefficient: qi(i64::from(sign)), diagram: sited_after_split(&raw, f64::from(pk) - SPLIT)? })
}

/// `(mid, tip, tip)` of two edges sharing exactly one endpoint.
fn vee_from_edges(e1: (f64, f64), e2: (f64, f64)) -> (f64, f64, f64) {
    let mid = if e1.0 == e2.0 || e1.0 == e2.1 { e1.0 } else { e1.1 };
    let t1 = if e1.0 == mid { e1.1 } else { e1.0 };
    let t2 = if e2.0 == mid { e2.1 } else { e2.0 };
    (mid, t1, t2)
}

/// All valid `(vertex, lone edge, order)` choices for a tree, in a fixed order.
pub fn tree_split_choices(tree: &PointGraph) -> Vec<(usize, (Pos, Pos), SplitOrder)> {
    let mut out = Vec::new();
    for (i, &p) in tree.points.iter().enumerate() {
        for &e in &tree.edges {
            if e.0 != p && e.1 != p {
                continue;
            }
            let u = if e.0 == p { e.1 } else { e.0 };
            if tree.degree(p) >= 2 && tree.degree(u) == 1 {
                out.push((i + 1, e, SplitOrder::Before));
                out.push((i + 1, e, SplitOrder::After));
            }
        }
    }
    out
}

/// All signed desingularisations of a tree V²-diagram (uncollected).
pub fn expand_tree(d: &Diagram) -> Result<Vec<SignedTerm>> {
    let tree = d.tree().ok_or_else(|| Error::WrongKind { expected: "D2-tree".into(), got: d.kind().to_string() })?;
    tree_split_choices(tree).into_iter().map(|(k, e, o)| split_tree_vertex(d, k, e, o)).collect()
}

/// Vertex labels 1..6 of a two-V diagram: the triple owning the least point
/// gets 1..3 by position, the other 4..6.
pub fn two_vee_labels(d: &Diagram) -> Result<BTreeMap<Pos, usize>> {
    if d.kind() != Kind::D2TwoVee {
        return Err(Error::WrongKind { expected: "D2-twoVee".into(), got: d.kind().to_string() });
    }
    let mut vs = d.vees().to_vec();
    vs.sort_by_key(|v| v.points()[0]);
    let mut labels = BTreeMap::new();
    for (block, v) in vs.iter().enumerate() {
        for (i, p) in v.points().iter().enumerate() {
            labels.insert(*p, 3 * block + i + 1);
        }
    }
    Ok(labels)
}

/// Splits the mid of one V of a V-carrying diagram into two adjacent points,
/// turning that V into two ordinary chords. `order = Before` attaches the
/// smaller tip to the first copy. Returns the two new chords and the raw diagram.
fn split_mid(d: &Diagram, which: usize, order: SplitOrder) -> (RawDiagram, [(f64, f64); 2], f64) {
    let v = d.vees()[which];
    let m = f64::from(v.mid);
    let (c0, c1) = match order {
        SplitOrder::Before => ((m - SPLIT, f64::from(v.tips.0)), (m + SPLIT, f64::from(v.tips.1))),
        SplitOrder::After => ((m + SPLIT, f64::from(v.tips.0)), (m - SPLIT, f64::from(v.tips.1))),
    };
    let mut chords = raw_chords(d);
    chords.extend([c0, c1]);
    let vees = d
        .vees()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != which)
        .map(|(_, w)| (f64::from(w.mid), f64::from(w.tips.0), f64::from(w.tips.1)))
        .collect();
    (RawDiagram { chords, vees, ..Default::default() }, [c0, c1], m - SPLIT)
}

/// The four signed desingularisations of a two-V diagram.
pub fn expand_two_vee(d: &Diagram) -> Result<Vec<SignedTerm>> {
    let labels = two_vee_labels(d)?;
    let mut out = Vec::with_capacity(4);
    for which in 0..2 {
        for order in [SplitOrder::Before, SplitOrder::After] {
            let (raw, [a, b], at) = split_mid(d, which, order);
            let label = labels[&d.vees()[which].mid];
            let sign = if label % 2 == 0 { 1 } else { -1 } * lk(&[a.0, a.1], &[b.0, b.1])?;
            out.push(SignedTerm { coefficient: qi(i64::from(sign)), diagram: sited_after_split(&raw, at)? });
        }
    }
    Ok(out)
}

/// Classical 4T compact expansion of a V-diagram into chord diagrams: the
/// mid splits in both orders, each weighted by `(−1)^label(mid)` (labels 1..3
/// by position in the triple) times the linking number of the two resulting
/// chords.
pub fn expand_one_vee(d: &Diagram) -> Result<FormalSum<Q>> {
    if d.kind() != Kind::D1 {
        return Err(Error::WrongKind { expected: "D1".into(), got: d.kind().to_string() });
    }
    let v = d.vees()[0];
    let label = v.points().iter().position(|&p| p == v.mid).expect("mid lies in its triple") + 1;
    let label_sign = if label % 2 == 0 { 1 } else { -1 };
    let mut out = FormalSum::zero();
    for order in [SplitOrder::Before, SplitOrder::After] {
        let (raw, [a, b], _) = split_mid(d, 0, order);
        let sign = label_sign * lk(&[a.0, a.1], &[b.0, b.1])?;
        out.add_term(canonicalize(&raw)?, qi(i64::from(sign)));
    }
    Ok(out)
}

/// The V on a sorted triple `t` obtained by removing triangle edge number
/// `index` (1: `{t0,t1}`, 2: `{t0,t2}`, 3: `{t1,t2}`).
pub fn vee_choice(t: [Pos; 3], index: usize) -> Vee {
    match index {
        1 => Vee::new(t[2], t[0], t[1]),
        2 => Vee::new(t[1], t[0], t[2]),
        _ => Vee::new(t[0], t[1], t[2]),
    }
}

/// Index (1..3) of a V within its triple, inverse of [`vee_choice`].
pub fn vee_index(v: &Vee) -> usize {
    let t = v.points();
    if v.mid == t[2] {
        1
    } else if v.mid == t[1] {
        2
    } else {
        3
    }
}

/// Collected sum of signed terms over sited diagrams.
pub fn collect_sited(terms: &[SignedTerm]) -> BTreeMap<SitedDiagram, Q> {
    let mut out: BTreeMap<SitedDiagram, Q> = BTreeMap::new();
    for t in terms {
        let e = out.entry(t.diagram.clone()).or_insert_with(|| qi(0));
        *e += &t.coefficient;
    }
    out.retain(|_, c| *c != qi(0));
    out
}

/// Forgets sites and collects.
pub fn collect_plain(terms: &[SignedTerm]) -> FormalSum<Q> {
    let mut out = FormalSum::zero();
    for t in terms {
        out.add_term(t.diagram.diagram.clone(), t.coefficient.clone());
    }
    out
}

/// Relation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "1T")]
    OneT,
    #[serde(rename = "2T")]
    TwoT,
    #[serde(rename = "4T")]
    FourT,
    #[serde(rename = "16T")]
    SixteenT,
    #[serde(rename = "28T")]
    TwentyEightT,
    #[serde(rename = "4x4T")]
    FourByFourT,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::OneT, Family::TwoT, Family::FourT, Family::SixteenT, Family::TwentyEightT, Family::FourByFourT];

    /// Families whose relators live on V-diagrams.
    pub const ON_V_DIAGRAMS: [Family; 5] =
        [Family::OneT, Family::TwoT, Family::SixteenT, Family::TwentyEightT, Family::FourByFourT];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::OneT => "1T",
            Family::TwoT => "2T",
            Family::FourT => "4T",
            Family::SixteenT => "16T",
            Family::TwentyEightT => "28T",
            Family::FourByFourT => "4x4T",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown relation family {s}")))
    }
}

/// Relators of one family in one degree, over an ordered diagram basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RelatorSet {
    pub degree: usize,
    pub family: Family,
    pub basis: Vec<Diagram>,
    pub relators: Vec<FormalSum<Q>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelatorSetJson {
    pub degree: usize,
    pub family: Family,
    pub basis: Vec<DiagramJson>,
    pub rows: Vec<Vec<(usize, String)>>,
}

impl RelatorSet {
    fn new(degree: usize, family: Family, basis: Vec<Diagram>, relators: impl IntoIterator<Item = FormalSum<Q>>) -> Self {
        let set: BTreeSet<Vec<(Diagram, Q)>> = relators
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| r.iter().map(|(d, c)| (d.clone(), c.clone())).collect())
            .collect();
        let relators = set
            .into_iter()
            .map(|terms| {
                let mut s = FormalSum::zero();
                for (d, c) in terms {
                    s.add_term(d, c);
                }
                s
            })
            .collect();
        Self { degree, family, basis, relators }
    }

    /// Relators as rows over the basis.
    pub fn matrix(&self) -> Result<SparseRationalMatrix> {
        let index: BTreeMap<&Diagram, usize> = self.basis.iter().enumerate().map(|(i, d)| (d, i)).collect();
        let mut m = SparseRationalMatrix::zeros(self.relators.len(), self.basis.len());
        for (r, rel) in self.relators.iter().enumerate() {
            for (d, c) in rel.iter() {
                let col = *index.get(d).ok_or_else(|| Error::Malformed(format!("diagram {d} not in basis")))?;
                m.add_to(r, col, c);
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<RelatorSetJson> {
        let m = self.matrix()?;
        Ok(RelatorSetJson {
            degree: self.degree,
            family: self.family,
            basis: self.basis.iter().map(Diagram::to_json).collect(),
            rows: (0..m.n_rows()).map(|r| m.row(r).iter().map(|(&c, v)| (c, fmt_q(v))).collect()).collect(),
        })
    }

    pub fn from_json(j: &RelatorSetJson) -> Result<Self> {
        let basis: Vec<Diagram> = j.basis.iter().map(Diagram::from_json).collect::<Result<_>>()?;
        let mut relators = Vec::new();
        for row in &j.rows {
            let mut s = FormalSum::zero();
            for (c, v) in row {
                let d = basis.get(*c).ok_or_else(|| Error::Parse(format!("column {c} out of range")))?;
                s.add_term(d.clone(), parse_q(v)?);
            }
            relators.push(s);
        }
        Ok(Self { degree: j.degree, family: j.family, basis, relators })
    }
}

const MAX_RELATION_DEGREE: usize = 4;

fn check_degree(m: usize) -> Result<()> {
    if !(2..=MAX_RELATION_DEGREE).contains(&m) {
        return Err(Error::Unsupported(format!("relations in degree {m} (supported: 2..={MAX_RELATION_DEGREE})")));
    }
    Ok(())
}

/// Every V-diagram with an ordinary chord on adjacent positions.
pub fn relators_1t(m: usize) -> Result<RelatorSet> {
    check_degree(m)?;
    let basis = enumerate(Kind::D1, m)?;
    let rels: Vec<_> = basis.iter().filter(|d| d.has_isolated_chord()).map(|d| FormalSum::term(d.clone(), qi(1))).collect();
    Ok(RelatorSet::new(m, Family::OneT, basis, rels))
}

/// For every V whose triple contains adjacent positions `i, i+1`, the sum of
/// the two V's with mids `i` and `i+1`.
pub fn relators_2t(m: usize) -> Result<RelatorSet> {
    check_degree(m)?;
    let basis = enumerate(Kind::D1, m)?;
    let mut rels = Vec::new();
    for d in &basis {
        let v = d.vees()[0];
        let t = v.points();
        for w in [[t[0], t[1], t[2]], [t[1], t[2], t[0]]] {
            let (i, j, k) = (w[0], w[1], w[2]);
            if j != i + 1 {
                continue;
            }
            let a = Diagram::with_vees(d.chord_list(), &[Vee::new(i, j, k)])?;
            let b = Diagram::with_vees(d.chord_list(), &[Vee::new(j, i, k)])?;
            rels.push(FormalSum::term(a, qi(1)).add(&FormalSum::term(b, qi(1))));
        }
    }
    Ok(RelatorSet::new(m, Family::TwoT, basis, rels))
}

/// Classical 4T relators on chord diagrams of degree `m`, in compact form:
/// for every triple the sums `V1 + V2` and `V2 + V3`, each V expanded by
/// [`expand_one_vee`].
pub fn relators_4t(m: usize) -> Result<RelatorSet> {
    check_degree(m)?;
    let basis = enumerate(Kind::D0, m)?;
    let mut rels = Vec::new();
    for d in enumerate(Kind::D1, m)? {
        let v = d.vees()[0];
        if vee_index(&v) != 2 {
            continue;
        }
        let t = v.points();
        let centre = expand_one_vee(&d)?;
        for other in [1, 3] {
            let e = Diagram::with_vees(d.chord_list(), &[vee_choice(t, other)])?;
            rels.push(centre.add(&expand_one_vee(&e)?));
        }
    }
    Ok(RelatorSet::new(m, Family::FourT, basis, rels))
}

/// The two compact 4T relators on a triple, as pairs of V indices.
pub const COMPACT_4T: [[usize; 2]; 2] = [[1, 2], [2, 3]];

/// The four 4×4T relators of a two-V frame: one per couple of compact 4T
/// relators, the formal product expanded by [`expand_two_vee`] (uncollected).
pub fn relators_4x4t_local(chords: &[(Pos, Pos)], a: [Pos; 3], b: [Pos; 3]) -> Result<Vec<Vec<SignedTerm>>> {
    if a.iter().any(|p| b.contains(p)) {
        return Err(Error::Malformed("overlapping triples".into()));
    }
    let mut out = Vec::new();
    for ca in COMPACT_4T {
        for cb in COMPACT_4T {
            let mut terms = Vec::new();
            for &ia in &ca {
                for &ib in &cb {
                    let d = Diagram::with_vees(chords, &[vee_choice(a, ia), vee_choice(b, ib)])?;
                    terms.extend(expand_two_vee(&d)?);
                }
            }
            out.push(terms);
        }
    }
    Ok(out)
}

/// Pairs `(A, B)` of disjoint sorted triples partitioning six points, with `A`
/// holding the least point.
pub fn triple_partitions(six: [Pos; 6]) -> Vec<([Pos; 3], [Pos; 3])> {
    let mut out = Vec::new();
    for i in 1..6 {
        for j in i + 1..6 {
            let a = [six[0], six[i], six[j]];
            let rest: Vec<Pos> = six.iter().copied().filter(|p| !a.contains(p)).collect();
            out.push((a, [rest[0], rest[1], rest[2]]));
        }
    }
    out
}

/// A frame: positions of `k` singular points plus an ambient chord matching
/// on the remaining points, enumerated over all of `1..=q`.
pub fn frames(k: usize, q: usize) -> Vec<(Vec<Pos>, Vec<(Pos, Pos)>)> {
    let mut out = Vec::new();
    for pts in crate::diagrams::combinations(q, k) {
        let pts: Vec<Pos> = pts.iter().map(|&i| i as Pos + 1).collect();
        let rest: Vec<Pos> = (1..=q as Pos).filter(|p| !pts.contains(p)).collect();
        for m in crate::diagrams::matchings(&rest) {
            out.push((pts.clone(), m));
        }
    }
    out
}

/// 4×4T relators in degree `m` over all two-triple frames.
pub fn relators_4x4t(m: usize) -> Result<RelatorSet> {
    check_degree(m)?;
    let basis = enumerate(Kind::D1, m)?;
    let mut rels = Vec::new();
    if m >= 4 {
        for (pts, chords) in frames(6, 6 + 2 * (m - 4)) {
            let six = [pts[0], pts[1], pts[2], pts[3], pts[4], pts[5]];
            for (a, b) in triple_partitions(six) {
                for terms in relators_4x4t_local(&chords, a, b)? {
                    rels.push(collect_plain(&terms));
                }
            }
        }
    }
    Ok(RelatorSet::new(m, Family::FourByFourT, basis, rels))
}

/// Places a local sited diagram into a frame: site `s` goes to `sites[s]`
/// (a two-point site is split around it) and the ambient chords are added.
pub fn embed_sited(local: &SitedDiagram, sites: &[Pos], ambient: &[(Pos, Pos)]) -> Result<Diagram> {
    if local.sites.len() != sites.len() {
        return Err(Error::Malformed(format!("{} sites for a frame of {}", local.sites.len(), sites.len())));
    }
    let mut place = Vec::new();
    for (s, &size) in local.sites.iter().enumerate() {
        let base = f64::from(sites[s]);
        match size {
            1 => place.push(base),
            2 => place.extend([base - SPLIT, base + SPLIT]),
            _ => return Err(Error::Malformed("site larger than two points".into())),
        }
    }
    let at = |p: Pos| place[p as usize - 1];
    let d = &local.diagram;
    let mut raw = RawDiagram {
        chords: d.chord_list().iter().map(|&(a, b)| (at(a), at(b))).collect(),
        vees: d.vees().iter().map(|v| (at(v.mid), at(v.tips.0), at(v.tips.1))).collect(),
        ..Default::default()
    };
    raw.chords.extend(ambient.iter().map(|&(a, b)| (f64::from(a), f64::from(b))));
    canonicalize(&raw)
}

type LocalRelators = Vec<(Family, Vec<(SitedDiagram, Q)>)>;

/// The 16T and 28T relators on the four-point tree configuration, over sited
/// columns. Derived once by elimination and cached.
pub fn relators_16t28t_local() -> Result<&'static [(Family, Vec<(SitedDiagram, Q)>)]> {
    static CACHE: OnceLock<std::result::Result<LocalRelators, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let (tc, rels) = crate::vassiliev::tree_relators(true).map_err(|e| e.to_string())?;
            Ok(rels
                .iter()
                .map(|r| {
                    let family = if r.star_trees == 0 { Family::SixteenT } else { Family::TwentyEightT };
                    let row = tc.columns.iter().zip(&r.row).filter(|(_, c)| !c.is_zero()).map(|(d, c)| (d.clone(), c.clone()));
                    (family, row.collect())
                })
                .collect())
        })
        .as_deref()
        .map_err(|e| Error::Malformed(format!("tree relators unavailable: {e}")))
}

/// 16T or 28T relators in degree `m`: the local relators embedded into every
/// frame of four singular points and ambient chords.
pub fn relators_16t28t(m: usize, family: Family) -> Result<RelatorSet> {
    check_degree(m)?;
    if !matches!(family, Family::SixteenT | Family::TwentyEightT) {
        return Err(Error::WrongKind { expected: "16T or 28T".into(), got: family.to_string() });
    }
    let basis = enumerate(Kind::D1, m)?;
    let mut rels = Vec::new();
    if m >= 3 {
        let local: Vec<_> = relators_16t28t_local()?.iter().filter(|(f, _)| *f == family).collect();
        for (pts, chords) in frames(4, 4 + 2 * (m - 3)) {
            for (_, row) in &local {
                let mut sum = FormalSum::zero();
                for (d, c) in row {
                    sum.add_term(embed_sited(d, &pts, &chords)?, c.clone());
                }
                rels.push(sum);
            }
        }
    }
    Ok(RelatorSet::new(m, family, basis, rels))
}

/// Relators of `family` in degree `m`.
pub fn relators(m: usize, family: Family) -> Result<RelatorSet> {
    match family {
        Family::OneT => relators_1t(m),
        Family::TwoT => relators_2t(m),
        Family::FourT => relators_4t(m),
        Family::SixteenT | Family::TwentyEightT => relators_16t28t(m, family),
        Family::FourByFourT => relators_4x4t(m),
    }
}

/// All relators on V-diagrams of degree `m`, stacked family by family.
#[derive(Clone, Debug)]
pub struct RelationMatrix {
    pub degree: usize,
    pub basis: Vec<Diagram>,
    /// `(family, first row, number of rows)` in stacking order.
    pub blocks: Vec<(Family, usize, usize)>,
    pub matrix: SparseRationalMatrix,
}

impl RelationMatrix {
    /// Family and index within the family of a row.
    pub fn locate(&self, row: usize) -> Option<(Family, usize)> {
        self.blocks.iter().find(|(_, start, n)| (*start..start + n).contains(&row)).map(|(f, start, _)| (*f, row - start))
    }

    /// Coordinates of a functional over the basis.
    pub fn coordinates(&self, w: &FormalSum<Q>) -> Vec<Q> {
        self.basis.iter().map(|d| w.coeff(d)).collect()
    }

    /// The functional with the given coordinates.
    pub fn functional(&self, v: &[Q]) -> FormalSum<Q> {
        let mut w = FormalSum::zero();
        for (d, c) in self.basis.iter().zip(v) {
            w.add_term(d.clone(), c.clone());
        }
        w
    }
}

/// Stacks the relators of every V-diagram family in degree `m`.
pub fn relation_matrix(m: usize) -> Result<RelationMatrix> {
    check_degree(m)?;
    let basis = enumerate(Kind::D1, m)?;
    let mut blocks = Vec::new();
    let mut rows = Vec::new();
    for family in Family::ON_V_DIAGRAMS {
        let set = relators(m, family)?;
        let mat = set.matrix()?;
        blocks.push((family, rows.len(), mat.n_rows()));
        rows.extend((0..mat.n_rows()).map(|r| mat.dense_row(r)));
    }
    let matrix = SparseRationalMatrix::from_rows(basis.len(), &rows);
    Ok(RelationMatrix { degree: m, basis, blocks, matrix })
}

/// Checks that the functional `w` vanishes on every relator of degree `m`,
/// naming the first violated relator otherwise.
pub fn is_weight_system(w: &FormalSum<Q>, m: usize) -> Result<WeightVerdict> {
    let rm = relation_matrix(m)?;
    if let Some(d) = w.iter().map(|(d, _)| d).find(|d| d.kind() != Kind::D1 || d.degree() != m) {
        return Err(Error::WrongKind { expected: format!("V-diagram of degree {m}"), got: d.to_string() });
    }
    let values = rm.matrix.mul_vec(&rm.coordinates(w));
    let violated = values.iter().position(|v| !v.is_zero()).map(|r| {
        let (family, index) = rm.locate(r).expect("row within a block");
        (family, index, values[r].clone())
    });
    Ok(WeightVerdict { ok: violated.is_none(), violated })
}

/// A basis of the weight systems of degree `m`: functionals annihilating every
/// relator.
pub fn weight_system_basis(m: usize) -> Result<Vec<FormalSum<Q>>> {
    let rm = relation_matrix(m)?;
    Ok(kernel_basis(&rm.matrix).iter().map(|v| rm.functional(v)).collect())
}

/// Verdict of [`is_weight_system`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVerdict {
    pub ok: bool,
    /// First violated relator: family, index within the family, value.
    pub violated: Option<(Family, usize, Q)>,
}

/// Evaluates a functional (coefficients on V-diagrams) on a relator.
pub fn evaluate(w: &FormalSum<Q>, r: &FormalSum<Q>) -> Q {
    r.iter().fold(qi(0), |acc, (d, c)| acc + c * w.coeff(d))
}

#[cfg(test)]
#[path = "relations_tests.rs"]
mod tests;
