use super::*;
use crate::diagrams::{combinations, sigma};
use crate::ratlinalg::{rank, transpose_kernel_basis, RowSpace};
use crate::vassiliev::{is_star, ordered_trees};

/// The four-term relation in its usual form on chord diagrams of the line: a
/// fixed chord `(A, B)` and a moving chord from `C` whose other end sits just
/// after or just before `A` or `B`; `D(A⁺) − D(A⁻) + D(B⁺) − D(B⁻)`.
fn standard_4t(m: usize) -> Vec<FormalSum<Q>> {
    let mut out = Vec::new();
    for d in enumerate(Kind::D0, m - 1).unwrap() {
        let chords: Vec<(f64, f64)> = d.chord_list().iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
        let n = 2 * chords.len() as u32;
        for &(a, b) in &chords {
            for gap in 0..=n {
                let c = f64::from(gap) + 0.5;
                let mut rel = FormalSum::zero();
                for end in [a, b] {
                    for (eps, s) in [(0.1, 1), (-0.1, -1)] {
                        let mut raw = RawDiagram { chords: chords.clone(), ..Default::default() };
                        raw.chords.push((c, end + eps));
                        rel.add_term(canonicalize(&raw).unwrap(), qi(s));
                    }
                }
                out.push(rel);
            }
        }
    }
    out
}

fn rows_over(basis: &[Diagram], rels: &[FormalSum<Q>]) -> Vec<Vec<Q>> {
    rels.iter().map(|r| basis.iter().map(|d| r.coeff(d)).collect()).collect()
}

#[test]
fn compact_4t_matches_standard_four_term_relation() {
    // Dimensions of the chord-diagram quotient: 1, 1, 3, 6 in degrees 1..4.
    for (m, quotient_dim) in [(2, 2), (3, 3), (4, 6)] {
        let basis = enumerate(Kind::D0, m).unwrap();
        let n = basis.len();
        let standard = RowSpace::new(&SparseRationalMatrix::from_rows(n, &rows_over(&basis, &standard_4t(m))));
        let ours = relators_4t(m).unwrap();
        assert!(standard.equals_span(&rows_over(&basis, &ours.relators)), "degree {m}");
        assert_eq!(n - standard.dim(), quotient_dim, "degree {m}");
    }
}

#[test]
fn sigma_is_constant_on_a_triple() {
    for d in enumerate(Kind::D1, 3).unwrap() {
        let t = d.vees()[0].points();
        let signs: BTreeSet<i32> = (1..=3)
            .map(|i| sigma(&Diagram::with_vees(d.chord_list(), &[vee_choice(t, i)]).unwrap()).unwrap().0)
            .collect();
        assert_eq!(signs.len(), 1);
    }
}

#[test]
fn tree_expansion_counts() {
    let trees = ordered_trees();
    let mut columns = BTreeSet::new();
    for t in &trees {
        let terms = expand_tree(t).unwrap();
        assert_eq!(terms.len(), if is_star(t) { 6 } else { 4 });
        columns.extend(terms.into_iter().map(|s| s.diagram));
    }
    assert_eq!(trees.len(), 16);
    assert_eq!(columns.len(), 72);
}

#[test]
fn splitting_a_leaf_is_rejected() {
    let star = ordered_trees().into_iter().find(is_star).unwrap();
    let g = star.tree().unwrap().clone();
    let leaf = (0..4).find(|&k| g.degree(g.points[k]) == 1).unwrap();
    let edge = *g.edges.iter().find(|(a, b)| *a == g.points[leaf] || *b == g.points[leaf]).unwrap();
    assert!(matches!(split_tree_vertex(&star, leaf + 1, edge, SplitOrder::Before), Err(Error::InvalidSplit(_))));
}

#[test]
fn one_and_two_term_examples() {
    assert!(relators_1t(2).unwrap().relators.is_empty());
    let r1 = relators_1t(3).unwrap();
    assert!(r1.relators.iter().all(|r| r.len() == 1));
    // V-diagrams of degree 3 with a chord joining adjacent points, counted directly.
    let direct = r1.basis.iter().filter(|d| d.chord_list().iter().any(|&(a, b)| b == a + 1)).count();
    assert_eq!(r1.relators.len(), direct);

    let r2 = relators_2t(2).unwrap();
    assert_eq!(r2.basis.len(), 3);
    let v = |mid, a, b| Diagram::with_vees(&[], &[Vee::new(mid, a, b)]).unwrap();
    let expected: BTreeSet<Vec<(Diagram, Q)>> = [(v(1, 2, 3), v(2, 1, 3)), (v(2, 1, 3), v(3, 1, 2))]
        .into_iter()
        .map(|(a, b)| {
            let s = FormalSum::term(a, qi(1)).add(&FormalSum::term(b, qi(1)));
            s.iter().map(|(d, c)| (d.clone(), c.clone())).collect()
        })
        .collect();
    let got: BTreeSet<Vec<(Diagram, Q)>> =
        r2.relators.iter().map(|s| s.iter().map(|(d, c)| (d.clone(), c.clone())).collect()).collect();
    assert_eq!(got, expected);
}

#[test]
fn four_by_four_local_shape() {
    let rels = relators_4x4t_local(&[], [1, 2, 3], [4, 5, 6]).unwrap();
    assert_eq!(rels.len(), 4);
    assert!(rels.iter().all(|r| r.len() == 16));
    assert!(relators_4x4t_local(&[], [1, 2, 3], [3, 4, 5]).is_err());
}

#[test]
fn tree_relators_split_into_families() {
    let local = relators_16t28t_local().unwrap();
    assert_eq!(local.len(), 6);
    assert_eq!(local.iter().filter(|(f, _)| *f == Family::SixteenT).count(), 3);
    assert_eq!(local.iter().filter(|(f, _)| *f == Family::TwentyEightT).count(), 3);
    // In degree 3 there is no ambient chord: one frame, so each family has 3 rows.
    for f in [Family::SixteenT, Family::TwentyEightT] {
        assert_eq!(relators_16t28t(3, f).unwrap().relators.len(), 3);
    }
    assert!(relators_16t28t(3, Family::TwoT).is_err());
}

#[test]
fn other_circuits_are_consequences() {
    let (tc, rep, rels) = crate::vassiliev::calibrate(false).unwrap();
    let flips: Vec<usize> = rep.flips.iter().map(|f| f - 1).collect();
    let six = SparseRationalMatrix::from_rows(tc.columns.len(), &rels.iter().map(|r| r.row.clone()).collect::<Vec<_>>());
    let span = RowSpace::new(&six);
    assert_eq!(span.dim(), 6);
    let m1 = &tc.m1;
    let mut extra_28 = 0;
    for size in 1..=6 {
        for s in combinations(16, size) {
            let sub = SparseRationalMatrix::from_rows(m1.n_cols(), &s.iter().map(|&r| m1.dense_row(r)).collect::<Vec<_>>());
            let k = transpose_kernel_basis(&sub);
            if k.len() != 1 || k[0].iter().any(Zero::is_zero) {
                continue;
            }
            let mut v = vec![qi(0); 16];
            for (i, &r) in s.iter().enumerate() {
                v[r] = k[0][i].clone();
            }
            for &f in &flips {
                v[f] = -v[f].clone();
            }
            assert!(span.contains(&tc.mright.vec_mul(&v)), "circuit {s:?}");
            if s.iter().any(|&i| is_star(&tc.trees[i])) {
                extra_28 += 1;
            }
        }
    }
    assert!(extra_28 >= 3);
}

#[test]
fn weight_systems_in_degree_three() {
    let rm = relation_matrix(3).unwrap();
    let basis = weight_system_basis(3).unwrap();
    assert_eq!(basis.len(), rm.basis.len() - rank(&rm.matrix));
    // Independent elimination: the left and right ranks agree.
    assert_eq!(rank(&rm.matrix), rank(&rm.matrix.transpose()));
    for w in &basis {
        assert!(rm.matrix.mul_vec(&rm.coordinates(w)).iter().all(Zero::is_zero));
        assert!(is_weight_system(w, 3).unwrap().ok);
    }
    assert!(is_weight_system(&FormalSum::zero(), 3).unwrap().ok);
}

#[test]
fn non_weight_system_names_a_violated_relator() {
    let rm = relation_matrix(3).unwrap();
    let ws = RowSpace::new(&SparseRationalMatrix::from_rows(
        rm.basis.len(),
        &weight_system_basis(3).unwrap().iter().map(|w| rm.coordinates(w)).collect::<Vec<_>>(),
    ));
    let base = weight_system_basis(3).unwrap().into_iter().next().unwrap_or_default();
    let unit = (0..rm.basis.len())
        .map(|i| {
            let mut e = vec![qi(0); rm.basis.len()];
            e[i] = qi(1);
            e
        })
        .find(|e| !ws.contains(e))
        .unwrap();
    let w = base.add(&rm.functional(&unit));
    let verdict = is_weight_system(&w, 3).unwrap();
    assert!(!verdict.ok);
    let (family, index, value) = verdict.violated.unwrap();
    assert!(!value.is_zero());
    let row = rm.blocks.iter().find(|b| b.0 == family).unwrap().1 + index;
    assert_eq!(evaluate(&w, &rm.functional(&rm.matrix.dense_row(row))), value);
}

#[test]
fn degree_bounds() {
    assert!(relation_matrix(5).is_err());
    assert!(relation_matrix(1).is_err());
}

#[test]
fn relator_set_json_round_trip() {
    let set = relators_2t(3).unwrap();
    let back = RelatorSet::from_json(&set.to_json().unwrap()).unwrap();
    assert_eq!(back, set);
}
