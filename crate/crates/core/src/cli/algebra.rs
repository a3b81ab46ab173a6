//! Exact subcommands: reference-matrix verification, relation sets, weight systems,
//! the curvature matrix and the tree-form lemma.

use serde_json::{json, Value};

use super::report::RunReport;
use crate::diagrams::FormalSum;
use crate::error::Result;
use crate::kzforms::{all_trees, curvature_matrix, tree_form_sign};
use crate::ratlinalg::{rank, Q};
use crate::relations::{is_weight_system, relators, weight_system_basis, Family};
use crate::vassiliev::{calibrate, verify_appendix, AppendixFixtures};

/// Terms of a rational functional as `{diagram, coeff}` with exact
/// coefficients.
pub fn functional_json(w: &FormalSum<Q>) -> Value {
    Value::Array(w.iter().map(|(d, c)| json!({ "diagram": d.to_json(), "coeff": c.to_string() })).collect())
}

pub fn verify(fixtures: &AppendixFixtures, digest_input: &[u8]) -> Result<RunReport> {
    let mut r = RunReport::new("verify-appendix", &[digest_input]);
    let a = verify_appendix(fixtures)?;
    r.check("tree M1 is 16x15", a.m1_shape == (16, 15), format!("{:?}", a.m1_shape));
    r.check("tree M1 has rank 10", a.m1_rank == 10, a.m1_rank.to_string());
    r.check("tree kernel dimension 5", a.m1_kernel_dim == 5, a.m1_kernel_dim.to_string());
    r.check("tree kernel spanned by removal boundaries", a.m1_kernel_spanned_by_five_edge_boundaries, "");
    r.check("tree transpose kernel dimension 6", a.m1_transpose_kernel_dim == 6, a.m1_transpose_kernel_dim.to_string());
    r.check("tree fixture vectors span the transpose kernel", a.fixture_vectors_span_transpose_kernel, "");
    r.check("two-triple left block is 9x6", a.left_shape == (9, 6), format!("{:?}", a.left_shape));
    r.check("two-triple kernel dimension 1", a.left_kernel_dim == 1, a.left_kernel_dim.to_string());
    r.check("two-triple kernel is the two-triangle boundary", a.left_kernel_is_two_triangle_boundary, "");
    r.check(
        "two-triple transpose kernel dimension 4",
        a.left_transpose_kernel_dim == 4,
        a.left_transpose_kernel_dim.to_string(),
    );
    r.check("two-triple fixture vectors span the transpose kernel", a.fixture_vectors_span_left_transpose_kernel, "");
    r.check("derived 4x4T rows equal the direct relators", a.derived_4x4t_equals_direct, "");
    r.outputs = serde_json::to_value(&a)?;
    Ok(r)
}

pub fn relation_set(degree: usize, family: Family) -> Result<RunReport> {
    let mut r = RunReport::new(&format!("relations --degree {degree} --family {family}"), &[]);
    let set = relators(degree, family)?;
    let expected_terms = match family {
        Family::OneT => Some(1),
        Family::TwoT => Some(2),
        _ => None,
    };
    match expected_terms {
        Some(n) => r.check(
            &format!("every relator has {n} term(s)"),
            set.relators.iter().all(|x| x.len() == n),
            format!("{} relators", set.relators.len()),
        ),
        None => r.check("relators generated", !set.relators.is_empty(), format!("{} relators", set.relators.len())),
    }
    r.outputs = serde_json::to_value(set.to_json()?)?;
    Ok(r)
}

pub fn weights(degree: usize) -> Result<RunReport> {
    let mut r = RunReport::new(&format!("weights --degree {degree}"), &[]);
    let basis = weight_system_basis(degree)?;
    let mut all = true;
    for w in &basis {
        all &= is_weight_system(w, degree)?.ok;
    }
    r.check("every basis element annihilates every relator", all, format!("dimension {}", basis.len()));
    r.outputs = json!({ "degree": degree, "dimension": basis.len(), "basis": basis.iter().map(functional_json).collect::<Vec<_>>() });
    Ok(r)
}

pub fn curvature(strands: usize, parallel: bool) -> Result<RunReport> {
    let mut r = RunReport::new(&format!("curvature --strands {strands}"), &[]);
    let c = curvature_matrix(strands)?;
    let shape = (c.matrix.n_rows(), c.matrix.n_cols());
    let rk = rank(&c.matrix);
    r.check("cube monomial rows vanish", c.cube_rows_vanish, "");
    r.check("three-strand terms vanish", c.three_strand_terms_vanish, "");
    let mut outputs = json!({ "shape": [shape.0, shape.1], "rank": rk, "matrix": c.matrix.to_json() });
    if strands == 4 {
        r.check("matrix is 16x72", shape == (16, 72), format!("{shape:?}"));
        r.check("rank 6", rk == 6, rk.to_string());
        let (_, cal, _) = calibrate(parallel)?;
        r.check("flip set has size 3", cal.flips.len() == 3, format!("{:?}", cal.flips));
        r.check("derived rows span the curvature rows", cal.row_spaces_equal, "");
        let mut terms = cal.relator_terms.clone();
        terms.sort_unstable();
        r.check("relators split as 3x16 and 3x28 terms", terms == [16, 16, 16, 28, 28, 28], format!("{terms:?}"));
        outputs["calibration"] = serde_json::to_value(&cal)?;
    } else {
        r.skip("calibration against the tree configuration", "only defined for four strands");
    }
    r.outputs = outputs;
    Ok(r)
}

pub fn tree_lemma(max_p: usize) -> Result<RunReport> {
    let mut r = RunReport::new(&format!("tree-lemma --max-p {max_p}"), &[]);
    let mut rows = vec![];
    for p in 2..=max_p {
        let trees = all_trees(p);
        let mut plus = 0usize;
        let mut minus = 0usize;
        let mut failures = 0usize;
        for t in &trees {
            match tree_form_sign(p, t) {
                Ok(1) => plus += 1,
                Ok(_) => minus += 1,
                Err(_) => failures += 1,
            }
        }
        let expected = p.pow(u32::try_from(p - 2).unwrap_or(u32::MAX));
        r.check(
            &format!("p = {p}: all trees give ±ω_p"),
            failures == 0 && trees.len() == expected,
            format!("{} trees, {plus} positive, {minus} negative", trees.len()),
        );
        rows.push(json!({ "p": p, "trees": trees.len(), "positive": plus, "negative": minus }));
    }
    r.outputs = Value::Array(rows);
    Ok(r)
}
