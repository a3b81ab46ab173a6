//! The two local pieces of Vassiliev's spectral sequence that produce the
//! relations on V-diagrams: the four-point tree configuration (16 trees,
//! 15 four-edge graphs, 72 V-diagrams) and the two-triple configuration
//! (9 two-V diagrams, 6 triangle+V diagrams, 36 V-diagrams).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use num_traits::Signed;

use crate::diagrams::{combinations, Diagram, FormalSum, PointGraph, Pos, SitedDiagram, TriangleVee, Vee};
use crate::error::{Error, Result};
use crate::ratlinalg::{
    kernel_basis, qi, rank, rank_of_rows, row_space_equal, RowSpace, transpose_kernel_basis, MatrixJson, SparseRationalMatrix, Q,
};
use crate::relations::{collect_sited, expand_tree, expand_two_vee, relators_4x4t_local, vee_choice, vee_index};

const POINTS: [Pos; 4] = [1, 2, 3, 4];

fn lex_pairs(points: &[Pos]) -> Vec<(Pos, Pos)> {
    let mut v = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            v.push((points[i], points[j]));
        }
    }
    v
}

fn is_connected(points: &[Pos], edges: &[(Pos, Pos)]) -> bool {
    PointGraph { points: points.to_vec(), edges: edges.to_vec() }.is_connected()
}

/// The 16 spanning trees on four isolated points: the 4 stars by centre,
/// then the 12 paths in lexicographic order of their edge lists.
pub fn ordered_trees() -> Vec<Diagram> {
    let all = lex_pairs(&POINTS);
    let mut stars = Vec::new();
    let mut paths = Vec::new();
    for ix in combinations(6, 3) {
        let es: Vec<(Pos, Pos)> = ix.iter().map(|&i| all[i]).collect();
        if !is_connected(&POINTS, &es) {
            continue;
        }
        let d = Diagram::with_tree(&[], POINTS, &es).expect("spanning tree");
        if POINTS.iter().any(|&p| d.tree().unwrap().degree(p) == 3) {
            stars.push(d);
        } else {
            paths.push(d);
        }
    }
    stars.sort_by_key(|d| {
        let t = d.tree().unwrap();
        *t.points.iter().find(|&&p| t.degree(p) == 3).unwrap()
    });
    stars.extend(paths);
    stars
}

/// Whether a tree is a star.
pub fn is_star(d: &Diagram) -> bool {
    d.tree().is_some_and(|t| t.points.iter().any(|&p| t.degree(p) == 3))
}

/// The 15 four-edge graphs on four points, in lexicographic order of edge lists.
pub fn enumerate_4_edge_graphs() -> Vec<Diagram> {
    let all = lex_pairs(&POINTS);
    combinations(6, 4)
        .into_iter()
        .map(|ix| {
            let es: Vec<(Pos, Pos)> = ix.iter().map(|&i| all[i]).collect();
            let g = PointGraph { points: POINTS.to_vec(), edges: es };
            Diagram::from_parts(4, vec![], vec![], None, Some(g), None).expect("connected four-edge graph")
        })
        .collect()
}

/// `Σ_j (−1)^(j−1) (g minus edge j)` over edges whose removal keeps `g`
/// connected; edges are labelled `1..4` lexicographically.
pub fn removal_boundary(g: &Diagram) -> Result<FormalSum<Q>> {
    let graph = g.graph4().ok_or_else(|| Error::WrongKind { expected: "D2tilde-graph4".into(), got: g.kind().to_string() })?;
    let mut out = FormalSum::zero();
    for (j, e) in graph.edges.iter().enumerate() {
        let rest: Vec<(Pos, Pos)> = graph.edges.iter().copied().filter(|x| x != e).collect();
        if !is_connected(&graph.points, &rest) {
            continue;
        }
        let pts = [graph.points[0], graph.points[1], graph.points[2], graph.points[3]];
        let tree = Diagram::with_tree(g.chord_list(), pts, &rest)?;
        out.add_term(tree, qi(if j % 2 == 0 { 1 } else { -1 }));
    }
    Ok(out)
}

/// Boundaries of the six five-edge graphs, as vectors over the 15 four-edge graphs.
pub fn five_edge_boundaries() -> Vec<Vec<Q>> {
    let all = lex_pairs(&POINTS);
    let graphs = enumerate_4_edge_graphs();
    let index: BTreeMap<Vec<(Pos, Pos)>, usize> =
        graphs.iter().enumerate().map(|(i, g)| (g.graph4().unwrap().edges.clone(), i)).collect();
    combinations(6, 5)
        .into_iter()
        .map(|ix| {
            let es: Vec<(Pos, Pos)> = ix.iter().map(|&i| all[i]).collect();
            let mut v = vec![qi(0); graphs.len()];
            for j in 0..es.len() {
                let rest: Vec<(Pos, Pos)> = es.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &e)| e).collect();
                v[index[&rest]] += qi(if j % 2 == 0 { 1 } else { -1 });
            }
            v
        })
        .collect()
}

/// Matrices of the four-point tree configuration.
#[derive(Clone, Debug)]
pub struct TreeConfig {
    pub trees: Vec<Diagram>,
    pub graphs: Vec<Diagram>,
    /// The 72 V-diagrams (sited by the four tree points), canonically ordered.
    pub columns: Vec<SitedDiagram>,
    /// 16×15: coefficient of each tree in the boundary of each graph.
    pub m1: SparseRationalMatrix,
    /// 16×72: desingularisation coefficients.
    pub mright: SparseRationalMatrix,
    /// Number of desingularisation terms per tree.
    pub terms_per_tree: Vec<usize>,
}

pub fn build_tree_config_matrices() -> Result<TreeConfig> {
    let trees = ordered_trees();
    let graphs = enumerate_4_edge_graphs();
    let tree_index: BTreeMap<&Diagram, usize> = trees.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut m1 = SparseRationalMatrix::zeros(trees.len(), graphs.len());
    for (c, g) in graphs.iter().enumerate() {
        for (t, v) in removal_boundary(g)?.iter() {
            m1.set(tree_index[t], c, v.clone());
        }
    }
    let expansions: Vec<_> = trees.iter().map(expand_tree).collect::<Result<_>>()?;
    let columns: Vec<SitedDiagram> =
        expansions.iter().flatten().map(|t| t.diagram.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let col_index: BTreeMap<&SitedDiagram, usize> = columns.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut mright = SparseRationalMatrix::zeros(trees.len(), columns.len());
    for (r, terms) in expansions.iter().enumerate() {
        for (d, v) in collect_sited(terms) {
            mright.set(r, col_index[&d], v);
        }
    }
    let terms_per_tree = expansions.iter().map(Vec::len).collect();
    Ok(TreeConfig { trees, graphs, columns, m1, mright, terms_per_tree })
}

/// Matrices of the two-triple configuration `A = {1,2,3}`, `B = {4,5,6}`.
#[derive(Clone, Debug)]
pub struct TwoTripleConfig {
    /// Row `3(a−1) + (b−1)`: V number `a` on `A` and `b` on `B`.
    pub rows: Vec<Diagram>,
    /// Columns 1..3: triangle on `B`, V number `c` on `A`; 4..6: triangle on `A`, V on `B`.
    pub left_columns: Vec<Diagram>,
    pub right_columns: Vec<SitedDiagram>,
    pub left: SparseRationalMatrix,
    pub right: SparseRationalMatrix,
}

const TRIPLE_A: [Pos; 3] = [1, 2, 3];
const TRIPLE_B: [Pos; 3] = [4, 5, 6];

fn triangle_vee_diagram(triangle: [Pos; 3], vee: Vee) -> Result<Diagram> {
    Diagram::from_parts(6, vec![], vec![], None, None, Some(TriangleVee { triangle, vee }))
}

/// Boundary of a triangle+V diagram: removing triangle edge `j` (chords of the
/// whole diagram labelled lexicographically) with sign `(−1)^(j−1)`.
pub fn triangle_vee_boundary(d: &Diagram) -> Result<FormalSum<Q>> {
    let tv = d
        .triangle_vee()
        .ok_or_else(|| Error::WrongKind { expected: "D2tilde-triVee".into(), got: d.kind().to_string() })?;
    let tri_edges = lex_pairs(&tv.triangle);
    let mut chords: Vec<(Pos, Pos)> = tri_edges.clone();
    chords.extend(tv.vee.chords());
    chords.extend(d.chord_list());
    chords.sort_unstable();
    let mut out = FormalSum::zero();
    for (idx, e) in tri_edges.iter().enumerate() {
        let j = chords.iter().position(|c| c == e).unwrap() + 1;
        let v = vee_choice(tv.triangle, idx + 1);
        let two = Diagram::with_vees(d.chord_list(), &[v, tv.vee])?;
        out.add_term(two, qi(if j % 2 == 1 { 1 } else { -1 }));
    }
    Ok(out)
}

/// Boundary of the two-triangle diagram on `A ∪ B`, as a vector over the
/// six left columns.
pub fn two_triangle_boundary(cfg: &TwoTripleConfig) -> Vec<Q> {
    let mut chords: Vec<(Pos, Pos)> = lex_pairs(&TRIPLE_A);
    chords.extend(lex_pairs(&TRIPLE_B));
    chords.sort_unstable();
    let mut v = vec![qi(0); 6];
    for (pos, e) in chords.iter().enumerate() {
        let sign = qi(if pos % 2 == 0 { 1 } else { -1 });
        let (tri, other) = if TRIPLE_A.contains(&e.0) { (TRIPLE_A, TRIPLE_B) } else { (TRIPLE_B, TRIPLE_A) };
        let idx = lex_pairs(&tri).iter().position(|x| x == e).unwrap() + 1;
        let d = triangle_vee_diagram(other, vee_choice(tri, idx)).expect("valid triangle+V");
        let c = cfg.left_columns.iter().position(|x| *x == d).unwrap();
        v[c] += sign;
    }
    v
}

pub fn build_two_triple_matrices() -> Result<TwoTripleConfig> {
    let mut rows = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            rows.push(Diagram::with_vees(&[], &[vee_choice(TRIPLE_A, a), vee_choice(TRIPLE_B, b)])?);
        }
    }
    let mut left_columns = Vec::new();
    for c in 1..=3 {
        left_columns.push(triangle_vee_diagram(TRIPLE_B, vee_choice(TRIPLE_A, c))?);
    }
    for c in 1..=3 {
        left_columns.push(triangle_vee_diagram(TRIPLE_A, vee_choice(TRIPLE_B, c))?);
    }
    let row_index: BTreeMap<&Diagram, usize> = rows.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut left = SparseRationalMatrix::zeros(9, 6);
    for (c, d) in left_columns.iter().enumerate() {
        for (two, v) in triangle_vee_boundary(d)?.iter() {
            left.set(row_index[two], c, v.clone());
        }
    }
    let expansions: Vec<_> = rows.iter().map(expand_two_vee).collect::<Result<_>>()?;
    let right_columns: Vec<SitedDiagram> =
        expansions.iter().flatten().map(|t| t.diagram.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let col_index: BTreeMap<&SitedDiagram, usize> = right_columns.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut right = SparseRationalMatrix::zeros(9, right_columns.len());
    for (r, terms) in expansions.iter().enumerate() {
        for (d, v) in collect_sited(terms) {
            right.set(r, col_index[&d], v);
        }
    }
    Ok(TwoTripleConfig { rows, left_columns, right_columns, left, right })
}

/// Rows `vᵀ·R` for a basis `v` of the left kernel of `L`.
pub fn derived_4x4t_rows(cfg: &TwoTripleConfig) -> SparseRationalMatrix {
    let ks = transpose_kernel_basis(&cfg.left);
    let rows: Vec<Vec<Q>> = ks.iter().map(|v| cfg.right.vec_mul(v)).collect();
    SparseRationalMatrix::from_rows(cfg.right_columns.len(), &rows)
}

/// The four directly generated 4×4T relators of the two-triple configuration
/// over its 36 columns.
pub fn direct_4x4t_rows(cfg: &TwoTripleConfig) -> Result<SparseRationalMatrix> {
    let index: BTreeMap<&SitedDiagram, usize> = cfg.right_columns.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let rels = relators_4x4t_local(&[], TRIPLE_A, TRIPLE_B)?;
    let mut m = SparseRationalMatrix::zeros(rels.len(), cfg.right_columns.len());
    for (r, terms) in rels.iter().enumerate() {
        for (d, v) in collect_sited(terms) {
            let c = *index.get(&d).ok_or_else(|| Error::Malformed(format!("4x4T term {} outside the 36 columns", d.diagram)))?;
            m.set(r, c, v);
        }
    }
    Ok(m)
}

/// Reorders a matrix's columns to follow `target` (which must hold the same set).
pub fn align_columns(m: &SparseRationalMatrix, cols: &[SitedDiagram], target: &[SitedDiagram]) -> Result<SparseRationalMatrix> {
    let index: BTreeMap<&SitedDiagram, usize> = target.iter().enumerate().map(|(i, d)| (d, i)).collect();
    if cols.len() != target.len() || cols.iter().any(|c| !index.contains_key(c)) {
        return Err(Error::ColumnMismatch(cols.len(), target.len()));
    }
    let mut out = SparseRationalMatrix::zeros(m.n_rows(), target.len());
    for (r, c, v) in m.entries() {
        out.set(r, index[&cols[c]], v.clone());
    }
    Ok(out)
}

/// `Mright` with the rows in `flips` negated.
pub fn flip_rows(m: &SparseRationalMatrix, flips: &[usize]) -> SparseRationalMatrix {
    let mut out = m.clone();
    for &r in flips {
        out.scale_row(r, &qi(-1));
    }
    out
}

/// `vᵀ·Mright` for each vector of `kernel`, after negating rows in `flips`.
pub fn derived_m2(cfg: &TreeConfig, kernel: &[Vec<Q>], flips: &[usize]) -> SparseRationalMatrix {
    let mr = flip_rows(&cfg.mright, flips);
    SparseRationalMatrix::from_rows(cfg.columns.len(), &kernel.iter().map(|v| mr.vec_mul(v)).collect::<Vec<_>>())
}

fn admissible(cfg: &TreeConfig, kernel: &[Vec<Q>], target: &RowSpace, flips: &[usize]) -> bool {
    let m2 = derived_m2(cfg, kernel, flips);
    target.equals_span(&(0..m2.n_rows()).map(|r| m2.dense_row(r)).collect::<Vec<_>>())
}

/// Whether the printed flip rows (1-based, printed tree order) reproduce the
/// curvature row space under at least one signed matching of `cfg.m1` to
/// `printed_m1`. A matched row with sign −1 counts as an extra flip.
pub fn printed_flips_admissible(
    cfg: &TreeConfig,
    curvature: &SparseRationalMatrix,
    printed_m1: &SparseRationalMatrix,
    printed_rows: &[usize],
) -> bool {
    let kernel = transpose_kernel_basis(&cfg.m1);
    let target = RowSpace::new(curvature);
    match_signed_all(&cfg.m1, printed_m1, usize::MAX).iter().any(|m| {
        let flips: Vec<usize> = (0..cfg.trees.len())
            .filter(|&r| printed_rows.contains(&(m.row_map[r] + 1)) != (m.row_signs[r] < 0))
            .collect();
        admissible(cfg, &kernel, &target, &flips)
    })
}

/// Smallest row-flip set `F` (by size, then lexicographically) for which the
/// derived rows span the same space as `curvature` (columns aligned with
/// `cfg.columns`). Sizes up to `max_size` are tried.
pub fn solve_epsilon_zeta(cfg: &TreeConfig, curvature: &SparseRationalMatrix, max_size: usize, parallel: bool) -> Result<Vec<usize>> {
    let kernel = transpose_kernel_basis(&cfg.m1);
    let target = RowSpace::new(curvature);
    let n = cfg.trees.len();
    for size in 0..=max_size {
        let candidates = combinations(n, size);
        let ok = crate::par::map(&candidates, parallel, |f| admissible(cfg, &kernel, &target, f));
        if let Some(i) = ok.iter().position(|&b| b) {
            return Ok(candidates[i].clone());
        }
    }
    Err(Error::NoAdmissibleFlip)
}

/// Left-kernel vectors of `m` with minimal supports: all circuits of size at
/// most `max_support`, greedily selected by (support size, lexicographic
/// support) into a basis.
pub fn minimal_support_left_kernel(m: &SparseRationalMatrix, max_support: usize) -> Vec<Vec<Q>> {
    let n = m.n_rows();
    let target = n - rank(m);
    let mut basis: Vec<Vec<Q>> = Vec::new();
    for size in 1..=max_support.min(n) {
        for s in combinations(n, size) {
            let sub = SparseRationalMatrix::from_rows(m.n_cols(), &s.iter().map(|&r| m.dense_row(r)).collect::<Vec<_>>());
            let k = transpose_kernel_basis(&sub);
            if k.len() != 1 || k[0].iter().any(|x| *x == qi(0)) {
                continue;
            }
            let mut v = vec![qi(0); n];
            for (i, &r) in s.iter().enumerate() {
                v[r] = k[0][i].clone();
            }
            let lead = v.iter().find(|x| **x != qi(0)).unwrap().clone();
            let v: Vec<Q> = v.iter().map(|x| x / &lead).collect();
            let mut trial = basis.clone();
            trial.push(v.clone());
            if rank_of_rows(&trial, n) == trial.len() {
                basis = trial;
                if basis.len() == target {
                    return basis;
                }
            }
        }
    }
    basis
}

/// A derived relator of the tree configuration.
#[derive(Clone, Debug)]
pub struct TreeRelator {
    /// Coefficients on the 16 trees (after the flips).
    pub tree_vector: Vec<Q>,
    /// Coefficients on the 72 columns.
    pub row: Vec<Q>,
    pub star_trees: usize,
    pub path_trees: usize,
    /// Number of desingularisation terms before collection.
    pub terms: usize,
}

/// The six relators from the minimal-support kernel basis with flips applied.
pub fn derived_tree_relators(cfg: &TreeConfig, flips: &[usize]) -> Vec<TreeRelator> {
    let kernel = minimal_support_left_kernel(&cfg.m1, 6);
    let mr = flip_rows(&cfg.mright, flips);
    kernel
        .into_iter()
        .map(|mut v| {
            for &f in flips {
                v[f] = -v[f].clone();
            }
            let row = cfg.mright.vec_mul(&v);
            debug_assert_eq!(row, mr.vec_mul(&flip_vec(&v, flips)));
            let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] != qi(0)).collect();
            let star_trees = support.iter().filter(|&&i| is_star(&cfg.trees[i])).count();
            let terms = support.iter().map(|&i| cfg.terms_per_tree[i]).sum();
            TreeRelator { tree_vector: v, row, star_trees, path_trees: support.len() - star_trees, terms }
        })
        .collect()
}

fn flip_vec(v: &[Q], flips: &[usize]) -> Vec<Q> {
    let mut out = v.to_vec();
    for &f in flips {
        out[f] = -out[f].clone();
    }
    out
}

/// Row/column bijection with signs between two ±1 matrices of equal shape:
/// `computed[r][c] = row_signs[r]·col_signs[c]·printed[row_map[r]][col_map[c]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedMatching {
    pub row_map: Vec<usize>,
    pub col_map: Vec<usize>,
    pub row_signs: Vec<i8>,
    pub col_signs: Vec<i8>,
}

fn sign_of(q: &Q) -> i8 {
    if *q > qi(0) {
        1
    } else {
        -1
    }
}

/// Union-find with parity, solving `s_x · s_y = parity` constraints.
fn solve_signs(n: usize, constraints: &[(usize, usize, i8)]) -> Option<Vec<i8>> {
    let mut adj: Vec<Vec<(usize, i8)>> = vec![vec![]; n];
    for &(x, y, p) in constraints {
        adj[x].push((y, p));
        adj[y].push((x, p));
    }
    let mut sign = vec![0i8; n];
    for start in 0..n {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, p) in &adj[x] {
                let want = sign[x] * p;
                if sign[y] == 0 {
                    sign[y] = want;
                    stack.push(y);
                } else if sign[y] != want {
                    return None;
                }
            }
        }
    }
    Some(sign)
}

/// Deterministic search for a [`SignedMatching`] (first found in
/// lexicographic order of row assignments).
pub fn match_signed(computed: &SparseRationalMatrix, printed: &SparseRationalMatrix) -> Option<SignedMatching> {
    match_signed_all(computed, printed, 1).into_iter().next()
}

/// Up to `limit` signed matchings, in lexicographic order of row assignments.
pub fn match_signed_all(computed: &SparseRationalMatrix, printed: &SparseRationalMatrix, limit: usize) -> Vec<SignedMatching> {
    let (nr, nc) = (computed.n_rows(), computed.n_cols());
    if printed.n_rows() != nr || printed.n_cols() != nc || limit == 0 {
        return vec![];
    }
    struct Search<'a> {
        a: &'a SparseRationalMatrix,
        b: &'a SparseRationalMatrix,
        row_map: Vec<Option<usize>>,
        col_map: Vec<Option<usize>>,
        used_rows: Vec<bool>,
        used_cols: Vec<bool>,
        found: Vec<SignedMatching>,
        limit: usize,
    }
    impl Search<'_> {
        /// Sign constraints of the partial matching; `None` when two matched
        /// entries differ in absolute value.
        fn constraints(&self) -> Option<Vec<(usize, usize, i8)>> {
            let nr = self.a.n_rows();
            let mut cs = Vec::new();
            for (r, pr) in self.row_map.iter().enumerate() {
                let Some(pr) = *pr else { continue };
                for (&c, v) in self.a.row(r) {
                    let pc = self.col_map[c].unwrap();
                    let w = self.b.get(pr, pc);
                    if v.abs() != w.abs() {
                        return None;
                    }
                    cs.push((r, nr + c, sign_of(v) * sign_of(&w)));
                }
            }
            Some(cs)
        }

        fn record(&mut self) {
            let (nr, nc) = (self.a.n_rows(), self.a.n_cols());
            let row_map: Vec<usize> = self.row_map.iter().map(|x| x.unwrap()).collect();
            // Columns that are zero in both matrices pair up in order.
            let mut spare = (0..nc).filter(|pc| !self.used_cols[*pc]);
            let col_map: Vec<usize> = self.col_map.iter().map(|c| c.or_else(|| spare.next()).unwrap()).collect();
            if let Some(signs) = self.constraints().and_then(|cs| solve_signs(nr + nc, &cs)) {
                self.found.push(SignedMatching {
                    row_map,
                    col_map,
                    row_signs: signs[..nr].to_vec(),
                    col_signs: signs[nr..].to_vec(),
                });
            }
        }

        /// Returns true once enough matchings are recorded.
        fn go(&mut self, r: usize) -> bool {
            let nr = self.a.n_rows();
            if r == nr {
                self.record();
                return self.found.len() >= self.limit;
            }
            let cols: Vec<usize> = self.a.row(r).keys().copied().collect();
            for pr in 0..nr {
                if self.used_rows[pr] || self.b.row(pr).len() != cols.len() {
                    continue;
                }
                let targets: Vec<usize> = self.b.row(pr).keys().copied().collect();
                let fixed_ok = cols.iter().all(|&c| self.col_map[c].is_none_or(|pc| targets.contains(&pc)));
                if !fixed_ok {
                    continue;
                }
                let free: Vec<usize> = cols.iter().copied().filter(|&c| self.col_map[c].is_none()).collect();
                let open: Vec<usize> = targets
                    .iter()
                    .copied()
                    .filter(|&pc| !self.used_cols[pc] && !cols.iter().any(|&c| self.col_map[c] == Some(pc)))
                    .collect();
                if open.len() != free.len() {
                    continue;
                }
                for perm in permutations(&open) {
                    for (&c, &pc) in free.iter().zip(&perm) {
                        self.col_map[c] = Some(pc);
                        self.used_cols[pc] = true;
                    }
                    self.row_map[r] = Some(pr);
                    self.used_rows[pr] = true;
                    let consistent = self.constraints().is_some_and(|cs| solve_signs(nr + self.a.n_cols(), &cs).is_some());
                    if consistent && self.go(r + 1) {
                        return true;
                    }
                    self.row_map[r] = None;
                    self.used_rows[pr] = false;
                    for (&c, &pc) in free.iter().zip(&perm) {
                        self.col_map[c] = None;
                        self.used_cols[pc] = false;
                    }
                }
            }
            false
        }
    }
    let mut s = Search {
        a: computed,
        b: printed,
        row_map: vec![None; nr],
        col_map: vec![None; nc],
        used_rows: vec![false; nr],
        used_cols: vec![false; nc],
        found: Vec::new(),
        limit,
    };
    s.go(0);
    s.found
}

fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Moves printed left-kernel vectors into computed row order and signs.
pub fn transport_vectors(vectors: &SparseRationalMatrix, m: &SignedMatching) -> Vec<Vec<Q>> {
    (0..vectors.n_rows())
        .map(|k| {
            (0..m.row_map.len())
                .map(|r| vectors.get(k, m.row_map[r]) * qi(i64::from(m.row_signs[r])))
                .collect()
        })
        .collect()
}

/// Transcribed matrices and vectors.
#[derive(Clone, Debug)]
pub struct AppendixFixtures {
    pub tree_left: SparseRationalMatrix,
    pub tree_left_transpose_kernel: SparseRationalMatrix,
    pub two_triple_left: SparseRationalMatrix,
    pub two_triple_left_transpose_kernel: SparseRationalMatrix,
    /// 1-based tree indices whose kernel entries change sign.
    pub epsilon_zeta_rows: Vec<usize>,
}

#[derive(Deserialize)]
struct FlipJson {
    rows: Vec<usize>,
}

impl AppendixFixtures {
    pub fn from_strs(tree: &str, tree_k: &str, two: &str, two_k: &str, flips: &str) -> Result<Self> {
        let m = |s: &str| -> Result<SparseRationalMatrix> {
            SparseRationalMatrix::from_json(&serde_json::from_str::<MatrixJson>(s)?)
        };
        let f: FlipJson = serde_json::from_str(flips)?;
        Ok(Self {
            tree_left: m(tree)?,
            tree_left_transpose_kernel: m(tree_k)?,
            two_triple_left: m(two)?,
            two_triple_left_transpose_kernel: m(two_k)?,
            epsilon_zeta_rows: f.rows,
        })
    }

    /// The fixtures compiled into the library.
    pub fn builtin() -> Self {
        Self::from_strs(
            include_str!("../fixtures/appendixC/tree_left.json"),
            include_str!("../fixtures/appendixC/tree_left_transpose_kernel.json"),
            include_str!("../fixtures/appendixC/two_triple_left.json"),
            include_str!("../fixtures/appendixC/two_triple_left_transpose_kernel.json"),
            include_str!("../fixtures/appendixC/epsilon_zeta.json"),
        )
        .expect("built-in fixtures parse")
    }

    pub fn load(dir: &std::path::Path) -> Result<Self> {
        let read = |f: &str| std::fs::read_to_string(dir.join(f)).map_err(Error::from);
        Self::from_strs(
            &read("tree_left.json")?,
            &read("tree_left_transpose_kernel.json")?,
            &read("two_triple_left.json")?,
            &read("two_triple_left_transpose_kernel.json")?,
            &read("epsilon_zeta.json")?,
        )
    }
}

fn span_equal(a: &[Vec<Q>], b: &[Vec<Q>], n: usize) -> bool {
    let ra = rank_of_rows(a, n);
    let rb = rank_of_rows(b, n);
    let both: Vec<Vec<Q>> = a.iter().chain(b).cloned().collect();
    ra == rb && rank_of_rows(&both, n) == ra
}

fn annihilates(vectors: &SparseRationalMatrix, m: &SparseRationalMatrix) -> bool {
    (0..vectors.n_rows()).all(|k| m.vec_mul(&vectors.dense_row(k)).iter().all(|x| *x == qi(0)))
}

/// Everything checked against the transcribed reference matrices.
#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub m1_shape: (usize, usize),
    pub m1_rank: usize,
    pub m1_kernel_dim: usize,
    pub m1_transpose_kernel_dim: usize,
    pub m1_kernel_spanned_by_five_edge_boundaries: bool,
    pub m1_nonzeros: usize,
    pub printed_m1_kernel_vectors_annihilate_printed_m1: bool,
    pub m1_matches_printed: bool,
    pub m1_matching: Option<SignedMatching>,
    pub printed_star_rows: Vec<usize>,
    pub fixture_vectors_span_transpose_kernel: bool,
    pub mright_shape: (usize, usize),
    pub terms_per_tree: Vec<usize>,
    pub left_shape: (usize, usize),
    pub left_kernel_dim: usize,
    pub left_transpose_kernel_dim: usize,
    pub left_kernel_is_two_triangle_boundary: bool,
    pub left_matches_printed_exactly: bool,
    pub left_matches_printed: bool,
    pub printed_left_kernel_vectors_annihilate_printed_left: bool,
    pub fixture_vectors_span_left_transpose_kernel: bool,
    pub right_shape: (usize, usize),
    pub derived_4x4t_equals_direct: bool,
    /// `dim Ker M = dim Ker M1 + dim Ker M2` for the full 16×87 matrix.
    pub kernel_decomposition_holds: bool,
    pub all_pass: bool,
}

pub fn verify_appendix(fx: &AppendixFixtures) -> Result<AppendixReport> {
    let tc = build_tree_config_matrices()?;
    let m1_rank = rank(&tc.m1);
    let m1_kernel = kernel_basis(&tc.m1);
    let m1_tk = transpose_kernel_basis(&tc.m1);
    let boundaries = five_edge_boundaries();
    let m1_kernel_spanned_by_five_edge_boundaries = span_equal(&boundaries, &m1_kernel, tc.graphs.len());
    let printed_ok = annihilates(&fx.tree_left_transpose_kernel, &fx.tree_left);
    let m1_matching = match_signed(&tc.m1, &fx.tree_left);
    let fixture_vectors_span_transpose_kernel = m1_matching.as_ref().is_some_and(|m| {
        let moved = transport_vectors(&fx.tree_left_transpose_kernel, m);
        span_equal(&moved, &m1_tk, tc.trees.len())
    });
    let printed_star_rows = m1_matching
        .as_ref()
        .map(|m| (0..tc.trees.len()).filter(|&r| is_star(&tc.trees[r])).map(|r| m.row_map[r] + 1).collect())
        .unwrap_or_default();

    let tt = build_two_triple_matrices()?;
    let l_kernel = kernel_basis(&tt.left);
    let l_tk = transpose_kernel_basis(&tt.left);
    let boundary = two_triangle_boundary(&tt);
    let left_kernel_is_two_triangle_boundary =
        l_kernel.len() == 1 && span_equal(&l_kernel, &[boundary], 6);
    let left_matching = match_signed(&tt.left, &fx.two_triple_left);
    let fixture_vectors_span_left_transpose_kernel = left_matching.as_ref().is_some_and(|m| {
        span_equal(&transport_vectors(&fx.two_triple_left_transpose_kernel, m), &l_tk, 9)
    });
    let derived = derived_4x4t_rows(&tt);
    let direct = direct_4x4t_rows(&tt)?;
    let derived_4x4t_equals_direct = direct.n_rows() == 4 && row_space_equal(&derived, &direct)?;

    let full = tc.m1.hstack(&tc.mright);
    let m2 = derived_m2(&tc, &m1_tk, &[]);
    let kernel_decomposition_holds =
        kernel_basis(&full).len() == m1_kernel.len() + (m2.n_cols() - rank(&m2));

    let mut r = AppendixReport {
        m1_shape: (tc.m1.n_rows(), tc.m1.n_cols()),
        m1_rank,
        m1_kernel_dim: m1_kernel.len(),
        m1_transpose_kernel_dim: m1_tk.len(),
        m1_kernel_spanned_by_five_edge_boundaries,
        m1_nonzeros: tc.m1.nnz(),
        printed_m1_kernel_vectors_annihilate_printed_m1: printed_ok,
        m1_matches_printed: m1_matching.is_some(),
        m1_matching,
        printed_star_rows,
        fixture_vectors_span_transpose_kernel,
        mright_shape: (tc.mright.n_rows(), tc.mright.n_cols()),
        terms_per_tree: tc.terms_per_tree.clone(),
        left_shape: (tt.left.n_rows(), tt.left.n_cols()),
        left_kernel_dim: l_kernel.len(),
        left_transpose_kernel_dim: l_tk.len(),
        left_kernel_is_two_triangle_boundary,
        left_matches_printed_exactly: tt.left == fx.two_triple_left,
        left_matches_printed: left_matching.is_some(),
        printed_left_kernel_vectors_annihilate_printed_left: annihilates(
            &fx.two_triple_left_transpose_kernel,
            &fx.two_triple_left,
        ),
        fixture_vectors_span_left_transpose_kernel,
        right_shape: (tt.right.n_rows(), tt.right.n_cols()),
        derived_4x4t_equals_direct,
        kernel_decomposition_holds,
        all_pass: false,
    };
    r.all_pass = r.m1_shape == (16, 15)
        && r.m1_rank == 10
        && r.m1_kernel_dim == 5
        && r.m1_transpose_kernel_dim == 6
        && r.m1_kernel_spanned_by_five_edge_boundaries
        && r.printed_m1_kernel_vectors_annihilate_printed_m1
        && r.m1_matches_printed
        && r.fixture_vectors_span_transpose_kernel
        && r.mright_shape == (16, 72)
        && r.left_shape == (9, 6)
        && r.left_kernel_dim == 1
        && r.left_transpose_kernel_dim == 4
        && r.left_kernel_is_two_triangle_boundary
        && r.left_matches_printed
        && r.fixture_vectors_span_left_transpose_kernel
        && r.right_shape == (9, 36)
        && r.derived_4x4t_equals_direct
        && r.kernel_decomposition_holds;
    Ok(r)
}

/// Result of the εζ calibration against the curvature matrix.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    pub curvature_rank: usize,
    pub flips: Vec<usize>,
    /// The same rows in the printed numbering, when a matching is known.
    pub flips_in_printed_order: Option<Vec<usize>>,
    /// Whether the transcribed flip rows are admissible under some matching.
    pub printed_flips_admissible: bool,
    pub row_spaces_equal: bool,
    pub relator_terms: Vec<usize>,
    pub relator_star_trees: Vec<usize>,
}

/// Calibrates εζ against the four-strand curvature matrix and derives the six
/// tree relators.
pub fn calibrate(parallel: bool) -> Result<(TreeConfig, CalibrationReport, Vec<TreeRelator>)> {
    let (tc, cm, flips, relators) = calibrated(parallel)?;
    let rows = SparseRationalMatrix::from_rows(tc.columns.len(), &relators.iter().map(|r| r.row.clone()).collect::<Vec<_>>());
    let fx = AppendixFixtures::builtin();
    let matching = match_signed(&tc.m1, &fx.tree_left);
    let report = CalibrationReport {
        curvature_rank: rank(&cm),
        flips_in_printed_order: matching.map(|m| {
            let mut v: Vec<usize> = flips.iter().map(|&f| m.row_map[f] + 1).collect();
            v.sort_unstable();
            v
        }),
        flips: flips.iter().map(|f| f + 1).collect(),
        printed_flips_admissible: printed_flips_admissible(&tc, &cm, &fx.tree_left, &fx.epsilon_zeta_rows),
        row_spaces_equal: row_space_equal(&rows, &cm)?,
        relator_terms: relators.iter().map(|r| r.terms).collect(),
        relator_star_trees: relators.iter().map(|r| r.star_trees).collect(),
    };
    Ok((tc, report, relators))
}

type Calibrated = (TreeConfig, SparseRationalMatrix, Vec<usize>, Vec<TreeRelator>);

/// Tree configuration, aligned curvature matrix, flip set and relators.
fn calibrated(parallel: bool) -> Result<Calibrated> {
    let tc = build_tree_config_matrices()?;
    let curv = crate::kzforms::curvature_matrix(4)?;
    let cm = align_columns(&curv.matrix, &curv.columns, &tc.columns)?;
    let flips = solve_epsilon_zeta(&tc, &cm, 3, parallel)?;
    let relators = derived_tree_relators(&tc, &flips);
    Ok((tc, cm, flips, relators))
}

/// The six tree relators with the tree configuration they live on.
pub fn tree_relators(parallel: bool) -> Result<(TreeConfig, Vec<TreeRelator>)> {
    let (tc, _, _, relators) = calibrated(parallel)?;
    Ok((tc, relators))
}

/// V index of a two-V row, `(a, b)`.
pub fn two_vee_row_index(d: &Diagram) -> Option<(usize, usize)> {
    let mut vs = d.vees().to_vec();
    if vs.len() != 2 {
        return None;
    }
    vs.sort_by_key(|v| v.points()[0]);
    Some((vee_index(&vs[0]), vee_index(&vs[1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_fixtures_reproduce() {
        let r = verify_appendix(&AppendixFixtures::builtin()).unwrap();
        assert!(r.all_pass, "{r:#?}");
        assert_eq!((r.m1_rank, r.m1_kernel_dim, r.m1_transpose_kernel_dim), (10, 5, 6));
        assert_eq!((r.left_kernel_dim, r.left_transpose_kernel_dim), (1, 4));
        assert_eq!(r.mright_shape, (16, 72));
        assert_eq!(r.right_shape.1, 36);
    }

    #[test]
    fn perturbed_fixture_does_not_match() {
        let fx = AppendixFixtures::builtin();
        let tc = build_tree_config_matrices().unwrap();
        let mut bad = fx.tree_left.clone();
        let (r, c, v) = bad.entries().next().map(|(r, c, v)| (r, c, v.clone())).unwrap();
        bad.set(r, c, v * qi(2));
        assert!(match_signed(&tc.m1, &fx.tree_left).is_some());
        assert!(match_signed(&tc.m1, &bad).is_none());
    }

    #[test]
    fn calibration() {
        let (_, rep, relators) = calibrate(true).unwrap();
        assert_eq!(rep.curvature_rank, 6);
        assert_eq!(rep.flips, vec![7, 11, 12]);
        assert!(rep.row_spaces_equal);
        let mut terms = rep.relator_terms.clone();
        terms.sort_unstable();
        assert_eq!(terms, vec![16, 16, 16, 28, 28, 28]);
        assert_eq!(relators.len(), 6);
        // The transcribed rows are not admissible under any matching.
        assert!(!rep.printed_flips_admissible);
    }

    #[test]
    fn no_flips_is_not_admissible() {
        let tc = build_tree_config_matrices().unwrap();
        let curv = crate::kzforms::curvature_matrix(4).unwrap();
        let cm = align_columns(&curv.matrix, &curv.columns, &tc.columns).unwrap();
        assert!(matches!(solve_epsilon_zeta(&tc, &cm, 0, false), Err(Error::NoAdmissibleFlip)));
    }
}
