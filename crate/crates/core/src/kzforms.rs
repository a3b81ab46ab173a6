//! Exact diagram-valued differential forms on configuration spaces of points
//! in the plane: the Knizhnik–Zamolodchikov 1-form `Ω_p`, the 2-form `Λ_p`
//! built from same-altitude chord pairs, their wedge products, and the
//! four-strand curvature matrix.
//!
//! Coefficients are rational functions whose denominators are products of the
//! linear factors `z_a − z_b` (`a < b`). The prefactors `(2iπ)^{-k}` are kept
//! as an integer grade and never evaluated.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use crate::diagrams::{canonicalize, RawDiagram, SitedDiagram};
use crate::error::{Error, Result};
use crate::ratlinalg::{qi, SparseRationalMatrix, Q};

/// Multivariate polynomial over the rationals in `z_1..z_n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Q) -> Self {
        let mut p = Self::zero(n);
        p.add_monomial(vec![0; n], c);
        p
    }

    /// The variable `z_i` (1-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i - 1] = 1;
        let mut p = Self::zero(n);
        p.add_monomial(e, qi(1));
        p
    }

    /// `z_a − z_b`.
    pub fn diff(n: usize, a: usize, b: usize) -> Self {
        Self::var(n, a) - Self::var(n, b)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn add_monomial(&mut self, e: Vec<u32>, c: Q) {
        let v = self.terms.entry(e.clone()).or_insert_with(|| qi(0));
        *v += c;
        if *v == qi(0) {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(|| qi(0))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.n);
        for (e, v) in &self.terms {
            out.add_monomial(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n, qi(1)), |acc, _| &acc * self)
    }

    /// Exact quotient by `z_a − z_b` when it divides, by synthetic division in `z_a`.
    pub fn div_linear(&self, a: usize, b: usize) -> Option<Self> {
        let ia = a - 1;
        let mut by_power: BTreeMap<u32, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[ia];
            rest[ia] = 0;
            by_power.entry(k).or_insert_with(|| Poly::zero(self.n)).add_monomial(rest, c.clone());
        }
        let Some(&top) = by_power.keys().next_back() else { return Some(Self::zero(self.n)) };
        let zb = Poly::var(self.n, b);
        let mut quotient = Poly::zero(self.n);
        let mut carry = Poly::zero(self.n);
        for k in (0..=top).rev() {
            let ck = by_power.remove(&k).unwrap_or_else(|| Poly::zero(self.n));
            let cur = &ck + &carry;
            if k == 0 {
                return cur.is_zero().then_some(quotient);
            }
            for (e, c) in &cur.terms {
                let mut e2 = e.clone();
                e2[ia] = k - 1;
                quotient.add_monomial(e2, c.clone());
            }
            carry = &cur * &zb;
        }
        unreachable!()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_monomial(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&qi(-1))
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_monomial(e, c1 * c2);
            }
        }
        out
    }
}

/// Differential form `Σ_S N_S(z) dz_S / ∏ (z_a − z_b)^{e_ab}` on `n` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalForm {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
    denom: BTreeMap<(usize, usize), u32>,
}

/// Sign of the permutation sorting `v` (0 if it has repeats).
fn sort_sign(v: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

impl RationalForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self { n, degree, terms: BTreeMap::new(), denom: BTreeMap::new() }
    }

    /// The constant 0-form `c`.
    pub fn scalar(n: usize, c: Q) -> Self {
        let mut f = Self::zero(n, 0);
        if c != qi(0) {
            f.terms.insert(vec![], Poly::constant(n, c));
        }
        f
    }

    /// `dz_i` (1-based).
    pub fn dz(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.terms.insert(vec![i], Poly::constant(n, qi(1)));
        f
    }

    /// `dz_a − dz_b`.
    pub fn ddiff(n: usize, a: usize, b: usize) -> Self {
        Self::dz(n, a).add(&Self::dz(n, b).scale(&qi(-1)))
    }

    /// `ω_ab = d log(z_a − z_b)`.
    pub fn omega(n: usize, a: usize, b: usize) -> Self {
        let (a, b) = (a.min(b), a.max(b));
        let mut f = Self::ddiff(n, a, b);
        f.denom.insert((a, b), 1);
        f
    }

    /// `ω_p = Σ_i (−1)^i dz_1∧…∧(omit dz_i)∧…∧dz_p`.
    pub fn omega_top(n: usize) -> Self {
        let mut f = Self::zero(n, n - 1);
        for i in 1..=n {
            let s: Vec<usize> = (1..=n).filter(|&k| k != i).collect();
            f.terms.insert(s, Poly::constant(n, qi(if i % 2 == 0 { 1 } else { -1 })));
        }
        f
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn denominator(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.denom
    }

    pub fn component(&self, s: &[usize]) -> Option<&Poly> {
        self.terms.get(s)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.clone();
        for p in out.terms.values_mut() {
            *p = p.scale(c);
        }
        out.normalize()
    }

    /// Cancels every linear factor of the denominator dividing all numerators.
    fn normalize(mut self) -> Self {
        self.terms.retain(|_, p| !p.is_zero());
        if self.terms.is_empty() {
            self.denom.clear();
            return self;
        }
        let pairs: Vec<(usize, usize)> = self.denom.keys().copied().collect();
        for (a, b) in pairs {
            while self.denom.get(&(a, b)).copied().unwrap_or(0) > 0 {
                let divided: Option<BTreeMap<Vec<usize>, Poly>> =
                    self.terms.iter().map(|(s, p)| p.div_linear(a, b).map(|q| (s.clone(), q))).collect();
                let Some(t) = divided else { break };
                self.terms = t;
                let e = self.denom.get_mut(&(a, b)).unwrap();
                *e -= 1;
                if *e == 0 {
                    self.denom.remove(&(a, b));
                }
            }
        }
        self
    }

    fn to_denominator(&self, target: &BTreeMap<(usize, usize), u32>) -> BTreeMap<Vec<usize>, Poly> {
        let mut factor = Poly::constant(self.n, qi(1));
        for (&(a, b), &e) in target {
            let have = self.denom.get(&(a, b)).copied().unwrap_or(0);
            factor = &factor * &Poly::diff(self.n, a, b).pow(e - have);
        }
        self.terms.iter().map(|(s, p)| (s.clone(), p * &factor)).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "point count mismatch");
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, o.degree, "adding forms of different degree");
        let mut denom = self.denom.clone();
        for (&k, &e) in &o.denom {
            let v = denom.entry(k).or_insert(0);
            *v = (*v).max(e);
        }
        let mut terms = self.to_denominator(&denom);
        for (s, p) in o.to_denominator(&denom) {
            let cur = terms.remove(&s).unwrap_or_else(|| Poly::zero(self.n));
            terms.insert(s, &cur + &p);
        }
        Self { n: self.n, degree: self.degree, terms, denom }.normalize()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&qi(-1)))
    }

    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "point count mismatch");
        let mut out = Self::zero(self.n, self.degree + o.degree);
        for (s1, p1) in &self.terms {
            for (s2, p2) in &o.terms {
                let mut s: Vec<usize> = s1.iter().chain(s2).copied().collect();
                let sign = sort_sign(&s);
                if sign == 0 {
                    continue;
                }
                s.sort_unstable();
                let prod = (p1 * p2).scale(&qi(i64::from(sign)));
                let cur = out.terms.remove(&s).unwrap_or_else(|| Poly::zero(self.n));
                out.terms.insert(s, &cur + &prod);
            }
        }
        out.denom = self.denom.clone();
        for (&k, &e) in &o.denom {
            *out.denom.entry(k).or_insert(0) += e;
        }
        out.normalize()
    }

    /// `Some(f)` with `self = f · other` when `other` has a single nonzero
    /// component pattern and `self` is proportional to it.
    pub fn ratio_to(&self, other: &Self) -> Option<(Poly, BTreeMap<(usize, usize), u32>)> {
        let (s0, p0) = other.terms.iter().next()?;
        if !other.denom.is_empty() || p0.terms.len() != 1 || p0.degree() != 0 {
            return None;
        }
        let c0 = p0.terms.values().next()?;
        let num = self.terms.get(s0).cloned().unwrap_or_else(|| Poly::zero(self.n)).scale(&(qi(1) / c0));
        let mut candidate = Self { n: self.n, degree: other.degree, terms: BTreeMap::new(), denom: self.denom.clone() };
        for (s, p) in &other.terms {
            candidate.terms.insert(s.clone(), &num * p);
        }
        let candidate = candidate.normalize();
        (candidate == *self || (self.is_zero() && num.is_zero())).then_some((num, self.denom.clone()))
    }
}

/// One level of a stacked strand diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    /// Chord `Γ_ij`, `i < j`.
    Chord(usize, usize),
    /// Same-altitude pair: chords `{mid, tips.0}` and `{mid, tips.1}`.
    Pair { mid: usize, tips: (usize, usize) },
}

/// Chord diagram on `p` vertical strands, levels listed bottom to top.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrandDiagram {
    pub p: usize,
    pub levels: Vec<Level>,
}

impl StrandDiagram {
    /// Connects the strands `1..p` into one line, each strand read upwards.
    /// Strand `s` becomes site `s`.
    pub fn line_closure(&self) -> Result<SitedDiagram> {
        let at = |s: usize, level: usize| (s * 1000 + level) as f64;
        let mut raw = RawDiagram::default();
        let mut sites = vec![0u32; self.p];
        for (l, lev) in self.levels.iter().enumerate() {
            match *lev {
                Level::Chord(i, j) => {
                    raw.chords.push((at(i, l), at(j, l)));
                    sites[i - 1] += 1;
                    sites[j - 1] += 1;
                }
                Level::Pair { mid, tips } => {
                    raw.vees.push((at(mid, l), at(tips.0, l), at(tips.1, l)));
                    for s in [mid, tips.0, tips.1] {
                        sites[s - 1] += 1;
                    }
                }
            }
        }
        SitedDiagram::new(canonicalize(&raw)?, sites)
    }

    /// Strands touched by some level.
    pub fn strands(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for lev in &self.levels {
            match *lev {
                Level::Chord(i, j) => {
                    s.insert(i);
                    s.insert(j);
                }
                Level::Pair { mid, tips } => {
                    s.extend([mid, tips.0, tips.1]);
                }
            }
        }
        s
    }
}

/// `Σ (strand diagram) ⊗ (form)`, with an overall `(2iπ)^{-grade}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramValuedForm {
    pub p: usize,
    pub grade: u32,
    pub terms: BTreeMap<StrandDiagram, RationalForm>,
}

impl DiagramValuedForm {
    fn insert(&mut self, d: StrandDiagram, f: RationalForm) {
        let cur = self.terms.remove(&d);
        let f = match cur {
            Some(c) => c.add(&f),
            None => f,
        };
        if !f.is_zero() {
            self.terms.insert(d, f);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if self.p != o.p {
            return Err(Error::StrandMismatch(self.p, o.p));
        }
        let mut out = self.clone();
        for (d, f) in &o.terms {
            out.insert(d.clone(), f.scale(&qi(-1)));
        }
        Ok(out)
    }

    /// Collects terms by line closure.
    pub fn closures(&self) -> Result<BTreeMap<SitedDiagram, RationalForm>> {
        let mut out: BTreeMap<SitedDiagram, RationalForm> = BTreeMap::new();
        for (d, f) in &self.terms {
            let key = d.line_closure()?;
            let v = match out.remove(&key) {
                Some(c) => c.add(f),
                None => f.clone(),
            };
            if !v.is_zero() {
                out.insert(key, v);
            }
        }
        Ok(out)
    }
}

/// `Ω_p = (2iπ)^{-1} Σ_{i<j} Γ_ij ω_ij`.
pub fn omega_kz(p: usize) -> Result<DiagramValuedForm> {
    if p < 2 {
        return Err(Error::Unsupported(format!("Ω_p needs p ≥ 2, got {p}")));
    }
    let mut f = DiagramValuedForm { p, grade: 1, terms: BTreeMap::new() };
    for i in 1..=p {
        for j in i + 1..=p {
            f.insert(StrandDiagram { p, levels: vec![Level::Chord(i, j)] }, RationalForm::omega(p, i, j));
        }
    }
    Ok(f)
}

/// Couples `{a,b} < {c,d}` of chords on `p` strands sharing one endpoint,
/// in lexicographic order, as `(first, second, shared)`.
pub fn lambda_couples(p: usize) -> Vec<((usize, usize), (usize, usize), usize)> {
    let mut chords = Vec::new();
    for i in 1..=p {
        for j in i + 1..=p {
            chords.push((i, j));
        }
    }
    let mut out = Vec::new();
    for (x, &c1) in chords.iter().enumerate() {
        for &c2 in &chords[x + 1..] {
            let shared = [c1.0, c1.1].into_iter().find(|v| *v == c2.0 || *v == c2.1);
            if let Some(s) = shared {
                if [c1.0, c1.1].contains(&c2.0) && [c1.0, c1.1].contains(&c2.1) {
                    continue;
                }
                out.push((c1, c2, s));
            }
        }
    }
    out
}

/// `Λ_p = (2iπ)^{-2} Σ_{{i,j}<{j,k}} Γ_ijk ω_ij ∧ ω_jk`.
pub fn lambda_kz(p: usize) -> Result<DiagramValuedForm> {
    if p < 3 {
        return Err(Error::Unsupported(format!("Λ_p needs p ≥ 3, got {p}")));
    }
    let mut f = DiagramValuedForm { p, grade: 2, terms: BTreeMap::new() };
    for (c1, c2, mid) in lambda_couples(p) {
        let t1 = if c1.0 == mid { c1.1 } else { c1.0 };
        let t2 = if c2.0 == mid { c2.1 } else { c2.0 };
        let level = Level::Pair { mid, tips: (t1.min(t2), t1.max(t2)) };
        let form = RationalForm::omega(p, c1.0, c1.1).wedge(&RationalForm::omega(p, c2.0, c2.1));
        f.insert(StrandDiagram { p, levels: vec![level] }, form);
    }
    Ok(f)
}

/// Stacks `f` below `g` and wedges the forms.
pub fn wedge(f: &DiagramValuedForm, g: &DiagramValuedForm) -> Result<DiagramValuedForm> {
    if f.p != g.p {
        return Err(Error::StrandMismatch(f.p, g.p));
    }
    let mut out = DiagramValuedForm { p: f.p, grade: f.grade + g.grade, terms: BTreeMap::new() };
    let pairs: Vec<(&StrandDiagram, &RationalForm, &StrandDiagram, &RationalForm)> = f
        .terms
        .iter()
        .flat_map(|(d1, f1)| g.terms.iter().map(move |(d2, f2)| (d1, f1, d2, f2)))
        .collect();
    let products = crate::par::map(&pairs, true, |(d1, f1, d2, f2)| {
        let mut levels = d1.levels.clone();
        levels.extend(d2.levels.iter().copied());
        (StrandDiagram { p: d1.p, levels }, f1.wedge(f2))
    });
    for (d, form) in products {
        out.insert(d, form);
    }
    Ok(out)
}

/// `Ω_p∧Λ_p − Λ_p∧Ω_p`.
pub fn curvature(p: usize) -> Result<DiagramValuedForm> {
    let om = omega_kz(p)?;
    let la = lambda_kz(p)?;
    wedge(&om, &la)?.sub(&wedge(&la, &om)?)
}

/// Degree-3 monomials in four variables other than cubes, in decreasing
/// lexicographic order of exponent vectors.
pub fn curvature_monomials() -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in (0..=3u32).rev() {
        for b in (0..=3 - a).rev() {
            for c in (0..=3 - a - b).rev() {
                let e = vec![a, b, c, 3 - a - b - c];
                if !e.contains(&3) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// The four-strand curvature matrix.
#[derive(Clone, Debug)]
pub struct CurvatureMatrix {
    pub monomials: Vec<Vec<u32>>,
    pub columns: Vec<SitedDiagram>,
    pub matrix: SparseRationalMatrix,
    /// Largest coefficient found on a cube monomial (must be zero).
    pub cube_rows_vanish: bool,
    /// Whether every three-strand closure has a zero form.
    pub three_strand_terms_vanish: bool,
}

/// Numerator `N` with `F = N · ω_4 / ∏_{a<b}(z_a − z_b)`.
fn top_numerator(f: &RationalForm) -> Result<Poly> {
    let n = f.n_points();
    let (num, denom) = f
        .ratio_to(&RationalForm::omega_top(n))
        .ok_or_else(|| Error::Malformed("curvature term is not proportional to ω_p".into()))?;
    let mut full = num;
    for a in 1..=n {
        for b in a + 1..=n {
            let e = denom.get(&(a, b)).copied().unwrap_or(0);
            if e > 1 {
                return Err(Error::Malformed("repeated linear factor in a curvature term".into()));
            }
            if e == 0 {
                full = &full * &Poly::diff(n, a, b);
            }
        }
    }
    Ok(full)
}

/// Rows: the 16 non-cube cubic monomials; columns: four-strand closures
/// (V with one chord), ordered canonically.
pub fn curvature_matrix(p: usize) -> Result<CurvatureMatrix> {
    if p != 4 {
        return Err(Error::Unsupported(format!("curvature matrix for p = {p}")));
    }
    let curv = curvature(p)?;
    let three_strand_terms_vanish = curv.terms.keys().all(|d| d.strands().len() == 4);
    let mut four: BTreeMap<SitedDiagram, RationalForm> = BTreeMap::new();
    let mut restricted = DiagramValuedForm { p, grade: curv.grade, terms: BTreeMap::new() };
    for (d, f) in &curv.terms {
        if d.strands().len() == 4 {
            restricted.terms.insert(d.clone(), f.clone());
        }
    }
    for (k, f) in restricted.closures()? {
        four.insert(k, f);
    }
    let monomials = curvature_monomials();
    let columns: Vec<SitedDiagram> = four.keys().cloned().collect();
    let mut matrix = SparseRationalMatrix::zeros(monomials.len(), columns.len());
    let mut cube_rows_vanish = true;
    for (c, f) in four.values().enumerate() {
        let num = top_numerator(f)?;
        for (e, v) in num.terms() {
            match monomials.iter().position(|m| m == e) {
                Some(r) => matrix.set(r, c, v.clone()),
                None => cube_rows_vanish = false,
            }
        }
    }
    Ok(CurvatureMatrix { monomials, columns, matrix, cube_rows_vanish, three_strand_terms_vanish })
}

/// `ω_T = ∧_{edges a<b, sorted} (dz_a − dz_b)`.
pub fn tree_form(p: usize, edges: &[(usize, usize)]) -> RationalForm {
    let mut es: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    es.sort_unstable();
    es.iter().fold(RationalForm::scalar(p, qi(1)), |acc, &(a, b)| acc.wedge(&RationalForm::ddiff(p, a, b)))
}

/// The sign `ε` with `ω_T = ε·ω_p`.
pub fn tree_form_sign(p: usize, edges: &[(usize, usize)]) -> Result<i32> {
    let verts: BTreeSet<usize> = (1..=p).collect();
    let mut seen = BTreeSet::from([1usize]);
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            if seen.contains(&a) != seen.contains(&b) {
                seen.insert(a);
                seen.insert(b);
                changed = true;
            }
        }
    }
    if edges.len() + 1 != p || seen != verts {
        return Err(Error::NotATree(format!("{edges:?} on {p} vertices")));
    }
    let f = tree_form(p, edges);
    let top = RationalForm::omega_top(p);
    for eps in [1, -1] {
        if f == top.scale(&qi(eps)) {
            return Ok(eps as i32);
        }
    }
    Err(Error::NotATree(format!("ω_T not proportional to ω_p for {edges:?}")))
}

/// Decodes a Prüfer sequence over `1..=p` into the edge list of a tree.
pub fn prufer_decode(seq: &[usize], p: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; p + 1];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(p - 1);
    for &s in seq {
        let leaf = (1..=p).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let last: Vec<usize> = (1..=p).filter(|&v| degree[v] == 1).collect();
    edges.push((last[0], last[1]));
    edges
}

/// All `p^(p-2)` labelled trees on `p` vertices.
pub fn all_trees(p: usize) -> Vec<Vec<(usize, usize)>> {
    if p < 2 {
        return vec![];
    }
    let len = p - 2;
    let total = p.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut seq = Vec::with_capacity(len);
            for _ in 0..len {
                seq.push(code % p + 1);
                code /= p;
            }
            seq.reverse();
            prufer_decode(&seq, p)
        })
        .collect()
}

/// Arnold's identity `ω_ij∧ω_jk + ω_jk∧ω_ki + ω_ki∧ω_ij = 0`.
pub fn arnold_holds(p: usize, i: usize, j: usize, k: usize) -> bool {
    let w = |a, b| RationalForm::omega(p, a, b);
    w(i, j).wedge(&w(j, k)).add(&w(j, k).wedge(&w(k, i))).add(&w(k, i).wedge(&w(i, j))).is_zero()
}

/// The grouping identity `ω_ij ∧ (ω_jk − ω_ik) = ω_ik ∧ ω_jk`.
pub fn two_t_grouping_holds(p: usize, i: usize, j: usize, k: usize) -> bool {
    let w = |a, b| RationalForm::omega(p, a, b);
    w(i, j).wedge(&w(j, k).sub(&w(i, k))) == w(i, k).wedge(&w(j, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlinalg::rank;

    #[test]
    fn poly_division() {
        let n = 3;
        let p = &Poly::diff(n, 1, 2) * &(&Poly::var(n, 3) + &Poly::var(n, 1).pow(2));
        let q = p.div_linear(1, 2).unwrap();
        assert_eq!(q, &Poly::var(n, 3) + &Poly::var(n, 1).pow(2));
        assert!(Poly::var(n, 1).div_linear(1, 2).is_none());
        assert!(Poly::zero(n).div_linear(2, 3).unwrap().is_zero());
    }

    #[test]
    fn omega_squared_vanishes() {
        let w = RationalForm::omega(3, 1, 2);
        assert!(w.wedge(&w).is_zero());
    }

    #[test]
    fn forms_of_small_p() {
        assert_eq!(omega_kz(2).unwrap().len(), 1);
        let l3 = lambda_kz(3).unwrap();
        assert_eq!(l3.len(), 3);
        let couples: Vec<_> = lambda_couples(3).iter().map(|(a, b, _)| (*a, *b)).collect();
        assert_eq!(couples, vec![((1, 2), (1, 3)), ((1, 2), (2, 3)), ((1, 3), (2, 3))]);
        assert_eq!(lambda_kz(4).unwrap().len(), 12);
        assert!(lambda_kz(2).is_err());
        assert!(omega_kz(1).is_err());
    }

    #[test]
    fn tree_signs_small() {
        assert_eq!(tree_form_sign(2, &[(1, 2)]).unwrap(), 1);
        assert_eq!(tree_form_sign(3, &[(1, 2), (2, 3)]).unwrap(), -1);
        assert!(tree_form_sign(3, &[(1, 2)]).is_err());
        assert_eq!(all_trees(4).len(), 16);
        assert_eq!(all_trees(5).len(), 125);
    }

    #[test]
    fn arnold_and_grouping() {
        for (i, j, k) in [(1, 2, 3), (1, 3, 4), (2, 3, 4)] {
            assert!(arnold_holds(4, i, j, k));
            assert!(two_t_grouping_holds(4, i, j, k));
        }
    }

    #[test]
    fn anticommutation_of_one_forms() {
        let a = RationalForm::omega(4, 1, 3);
        let b = RationalForm::omega(4, 2, 4);
        assert_eq!(a.wedge(&b), b.wedge(&a).scale(&qi(-1)));
    }

    #[test]
    fn curvature_shape() {
        let c = curvature_matrix(4).unwrap();
        assert_eq!(c.monomials.len(), 16);
        assert_eq!(c.columns.len(), 72);
        assert!(c.cube_rows_vanish);
        assert!(c.three_strand_terms_vanish);
        assert_eq!(rank(&c.matrix), 6);
    }

    #[test]
    fn five_strand_terms_cancel() {
        let c = curvature(5).unwrap();
        assert!(c.terms.keys().any(|d| d.strands().len() == 5));
        let closures = c.closures().unwrap();
        assert!(closures.keys().all(|k| k.sites.iter().filter(|&&s| s > 0).count() <= 4));
    }
}
