//! Numerical properties of the integrals beyond the acceptance suite:
//! additivity under concatenation, convergence of the grouped integrand with
//! its ungrouped negative control, and the braid slab on a trefoil.

mod common;

use kzcocycle::integrator::braid::z1_braid;
use kzcocycle::integrator::tables::Grouping;
use kzcocycle::integrator::{gramain, z1, z1_window, z1_with, Braid, KnotPath, MorseKnot, NumericVector, QuadratureConfig, Z1Options};

use common::fixture_knot;

fn quad(tol: f64) -> QuadratureConfig {
    QuadratureConfig { tol, ..QuadratureConfig::default() }
}

/// Largest coefficient gap between `a` and `b` in units of the combined error.
fn gap_in_errors(a: &NumericVector, b: &NumericVector) -> f64 {
    let diff = a.combine(1.0, b, -1.0).unwrap();
    diff.iter().map(|(_, c, e)| c.norm() / (e + 1e-15)).fold(0.0, f64::max)
}

fn bent_hump(phi: f64, dx: f64, dy: f64) -> MorseKnot {
    let mut w: Vec<[f64; 3]> = fixture_knot("hump").rotated(phi).vertices().to_vec();
    w[2][0] += dx;
    w[2][1] += dy;
    MorseKnot::new(w).unwrap()
}

#[test]
fn concatenation_adds() {
    let q = quad(1e-7);
    let k = fixture_knot("hump");
    let mid = bent_hump(0.6, 0.2, -0.1);
    let first = KnotPath::keyframes(vec![k.clone(), mid.clone()], (0.0, 1.0)).unwrap();
    let second = KnotPath::keyframes(vec![mid, k.rotated(1.2)], (0.0, 1.0)).unwrap();
    let whole = z1(&first.concat(&second).unwrap(), 3, &q).unwrap();
    let parts = z1(&first, 3, &q).unwrap().combine(1.0, &z1(&second, 3, &q).unwrap(), 1.0).unwrap();
    assert!(whole.max_abs() > 1e-4);
    let gap = gap_in_errors(&whole, &parts);
    assert!(gap <= 10.0, "concatenation differs by {gap} errors");
}

#[test]
fn grouped_integrand_converges_as_the_cutoff_shrinks() {
    let q = quad(1e-7);
    let path = gramain(fixture_knot("hump"));
    let at = |cutoff: f64| z1_with(&path, 3, &q, &Z1Options { cutoff, ..Z1Options::default() }).unwrap();
    let limit = at(0.0);
    let gaps: Vec<f64> =
        [1e-2, 1e-3, 1e-4].iter().map(|&c| at(c).combine(1.0, &limit, -1.0).unwrap().max_abs()).collect();
    assert!(gaps[0] > 1e-4, "{gaps:?}");
    assert!(gaps[1] < gaps[0] / 3.0 && gaps[2] < gaps[1] / 3.0, "{gaps:?}");
    // The limit carries the hump's crossing coefficient 1/24.
    assert!((limit.max_abs() - 1.0 / 24.0).abs() < 1e-6, "{}", limit.max_abs());
}

#[test]
fn ungrouped_integrand_diverges_logarithmically() {
    let q = quad(1e-7);
    let path = gramain(fixture_knot("hump"));
    let at = |grouping: Grouping, cutoff: f64| {
        z1_with(&path, 2, &q, &Z1Options { grouping, cutoff, ..Z1Options::default() }).unwrap().max_abs()
    };
    let cutoffs = [1e-2, 1e-3, 1e-4];
    let none: Vec<f64> = cutoffs.iter().map(|&c| at(Grouping::None, c)).collect();
    let steps = [none[1] - none[0], none[2] - none[1]];
    // Equal growth per decade of the cutoff.
    assert!(steps[0] > 0.1 && (steps[1] / steps[0] - 1.0).abs() < 0.1, "{none:?}");
    for c in cutoffs {
        assert!(at(Grouping::TwoTerm, c) < 1e-12);
    }
}

#[test]
fn braid_slab_agrees_with_the_trefoil_window() {
    let q = quad(1e-6);
    let path = gramain(fixture_knot("trefoil_a"));
    let window = (1.2, 2.8);
    let braid = Braid::from_path_window(&path, window).unwrap();
    let slab = z1_braid(&braid, braid.strands, 3, &q).unwrap();
    let full = z1_window(&path, window, 3, &q).unwrap();
    assert!(slab.max_abs() > 1e-6);
    let diff = slab.combine(1.0, &full, -1.0).unwrap();
    for (d, c, e) in diff.iter() {
        assert!(c.norm() <= 2.0 * e + 1e-12, "{d:?}: {c} exceeds {e}");
    }
}
