//! The braid-slab form of the 1-cocycle integral.
//!
//! On an altitude window free of critical points a path of knots is a moving
//! braid `β: [φ₀, φ₁] × [t₀, t₁] → ℂ^p ∖ Δ`. Its integral pulls back the
//! two-form `Λ_p` at one level and the connection `Ω_p` at the others, with
//! the sign `(−1)^{i−1}` of the level carrying `Λ_p`; after orienting by
//! `dφ ∧ dt₁ ∧ … ∧ dtₙ` every face contributes `(B_{mp}A_{mq} − A_{mp}B_{mq})·∏A`
//! with `{m,p} < {m,q}` lexicographically. Every level is integrated
//! numerically here; strands are closed into a line in index order.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;

use super::frame::PointState;
use super::path::KnotPath;
use super::quadrature::{clip_breaks, Adaptive, Estimate, QuadratureConfig, Rule};
use super::tables::{output_basis, Tables};
use super::vector::NumericVector;
use super::z1::Z1Options;
use crate::diagrams::Kind;
use crate::error::{Error, Result};

/// Positions and derivatives of all strands at one altitude.
pub type StrandEval = Box<dyn Fn(f64) -> Vec<PointState> + Send + Sync>;

/// The braid at one value of the path parameter: strand evaluation and the
/// altitudes where strands bend.
pub struct BraidSlice {
    pub eval: StrandEval,
    pub breaks: Vec<f64>,
}

type SliceFn<'a> = Box<dyn Fn(f64) -> Result<BraidSlice> + Send + Sync + 'a>;

/// A moving braid on `p` strands over `[φ₀, φ₁] × [t₀, t₁]`.
pub struct Braid<'a> {
    pub strands: usize,
    /// Strands traversed downwards when closed into a line.
    pub down: Vec<bool>,
    pub phi_range: (f64, f64),
    pub t_range: (f64, f64),
    /// Values of `φ` where the motion bends.
    pub phi_breaks: Vec<f64>,
    slice: SliceFn<'a>,
}

impl<'a> Braid<'a> {
    /// A braid given by an explicit strand map `(φ, t) ↦ strand states`.
    pub fn from_fn<F>(down: Vec<bool>, phi_range: (f64, f64), t_range: (f64, f64), f: F) -> Self
    where
        F: Fn(f64, f64) -> Vec<PointState> + Send + Sync + Clone + 'static,
    {
        let strands = down.len();
        let slice = Box::new(move |phi: f64| {
            let f = f.clone();
            Ok(BraidSlice { eval: Box::new(move |t| f(phi, t)), breaks: vec![] })
        });
        Self { strands, down, phi_range, t_range, phi_breaks: vec![phi_range.0, phi_range.1], slice }
    }

    /// The part of `path` between altitudes `t0 < t1`; fails if a critical
    /// altitude enters the window anywhere along the path.
    pub fn from_path_window(path: &'a KnotPath, window: (f64, f64)) -> Result<Self> {
        let (t0, t1) = window;
        if t0.partial_cmp(&t1) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Malformed(format!("empty altitude window [{t0}, {t1}]")));
        }
        path.validate()?;
        // Critical altitudes move linearly between breaks, so checking the
        // breaks shows whether one ever enters the window.
        let mut side: Vec<Option<bool>> = vec![];
        for phi in path.breaks() {
            let crit = path.knot_at(phi)?.critical_altitudes();
            side.resize(crit.len(), None);
            for (k, &t) in crit.iter().enumerate() {
                if t >= t0 && t <= t1 {
                    return Err(Error::Malformed(format!("critical altitude {t} inside the window at φ = {phi}")));
                }
                let below = t < t0;
                if side[k].is_some_and(|s| s != below) {
                    return Err(Error::Malformed(format!("a critical altitude crosses the window near φ = {phi}")));
                }
                side[k] = Some(below);
            }
        }
        let (a, _) = path.range();
        let frame = path.frame(a)?;
        let arcs: Vec<usize> = (0..frame.arcs.len()).filter(|&k| frame.arcs[k].lo < t0 && frame.arcs[k].hi > t1).collect();
        let down: Vec<bool> = arcs.iter().map(|&k| !frame.arcs[k].up).collect();
        let slice = Box::new(move |phi: f64| {
            let frame = path.frame(phi)?;
            let breaks = frame.breakpoints.clone();
            let arcs = arcs.clone();
            Ok(BraidSlice { eval: Box::new(move |t| arcs.iter().map(|&k| frame.arcs[k].eval(t)).collect()), breaks })
        });
        Ok(Self { strands: down.len(), down, phi_range: path.range(), t_range: window, phi_breaks: path.breaks(), slice })
    }
}

/// `∂_t log` and `∂_φ log` of every strand difference, checking the big
/// diagonal.
fn log_derivatives(states: &[PointState], t: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let p = states.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut a, mut b) = (vec![zero; p * p], vec![zero; p * p]);
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let d = states[i].z - states[j].z;
            if d == zero {
                return Err(Error::DiagonalCollision(format!("strands {i} and {j} meet at altitude {t}")));
            }
            a[i * p + j] = (states[i].zt - states[j].zt) / d;
            b[i * p + j] = (states[i].zp - states[j].zp) / d;
        }
    }
    Ok((a, b))
}

/// `Z¹(β)` up to degree `max_degree ∈ {2, 3}` with `p` strands, as the
/// representative orthogonal to every relator.
pub fn z1_braid(braid: &Braid, p: usize, max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    z1_braid_with(braid, p, max_degree, quad, &Z1Options::default())?.canonical()
}

/// [`z1_braid`] in the basis of the chosen grouping, before projection.
pub fn z1_braid_with(
    braid: &Braid,
    p: usize,
    max_degree: usize,
    quad: &QuadratureConfig,
    options: &Z1Options,
) -> Result<NumericVector> {
    if p != braid.strands {
        return Err(Error::StrandMismatch(p, braid.strands));
    }
    if !(2..=3).contains(&max_degree) {
        return Err(Error::Unsupported(format!("braid integral of degree {max_degree} (2 or 3)")));
    }
    quad.validate()?;
    if p.is_multiple_of(2) {
        eprintln!("warning: braid with an even number {p} of strands cannot be a slab of a long knot");
    }
    let basis = output_basis(Kind::D1, max_degree, options.grouping)?;
    let dim = basis.len();
    if p < 3 {
        return Ok(NumericVector::zero(Kind::D1, max_degree));
    }
    let up: Vec<bool> = braid.down.iter().map(|d| !d).collect();
    let tables = Tables::new(&up, &basis, options.grouping, Kind::D1, max_degree);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let norm = [two_pi_i.powi(-2), two_pi_i.powi(-3)];
    let (t0, t1) = braid.t_range;
    let (phi0, phi1) = braid.phi_range;
    let rule = Rule::new(quad.order);
    let inner_tol = 0.1 * quad.tol / ((phi1 - phi0) * (t1 - t0));
    let failure = Mutex::new(None);
    let fail = |e: Error| {
        failure.lock().expect("unpoisoned").get_or_insert(e);
    };
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|c| (c + 1..p).map(move |d| (c, d))).collect();
    let per_phi = |phi: f64| -> Estimate {
        let slice = match (braid.slice)(phi) {
            Ok(s) => s,
            Err(e) => {
                fail(e);
                return Estimate::zeros(dim);
            }
        };
        let breaks = clip_breaks(slice.breaks.iter().copied(), t0, t1);
        // `A_{cd}` for every chord, as a vector over `pairs`.
        let chord_forms = |u: f64| -> Estimate {
            let states = (slice.eval)(u);
            match log_derivatives(&states, u) {
                Ok((a, _)) => Estimate::exact(pairs.iter().map(|&(c, d)| a[c * p + d]).collect()),
                Err(e) => {
                    fail(e);
                    Estimate::zeros(pairs.len())
                }
            }
        };
        let chords = Adaptive { f: &chord_forms, dim: pairs.len(), rule: &rule, max_refine: quad.max_refine, parallel_nodes: false };
        let level = |s: f64| -> Estimate {
            let states = (slice.eval)(s);
            let (a, b) = match log_derivatives(&states, s) {
                Ok(x) => x,
                Err(e) => {
                    fail(e);
                    return Estimate::zeros(dim);
                }
            };
            let faces = if max_degree >= 3 {
                let above = chords.integrate(&clip_breaks(breaks.iter().copied(), s, t1), inner_tol, false);
                let below = chords.integrate(&clip_breaks(breaks.iter().copied(), t0, s), inner_tol, false);
                Some([above, below])
            } else {
                None
            };
            let mut out = Estimate::zeros(dim);
            for m in 0..p {
                for tp in 0..p {
                    for tq in tp + 1..p {
                        if m == tp || m == tq {
                            continue;
                        }
                        let dens = b[m * p + tp] * a[m * p + tq] - a[m * p + tp] * b[m * p + tq];
                        if let Some((idx, sign)) = tables.vee(m, tp, tq) {
                            out.value[idx as usize] += dens * sign * norm[0];
                        }
                        let Some(faces) = &faces else { continue };
                        for (face, est) in faces.iter().enumerate() {
                            for (k, &(c, d)) in pairs.iter().enumerate() {
                                if let Some((idx, sign)) = tables.vee_chord(face, m, tp, tq, c, d) {
                                    let w = dens * sign * norm[1];
                                    out.value[idx as usize] += w * est.value[k];
                                    out.err[idx as usize] += w.norm() * est.err[k];
                                }
                            }
                        }
                    }
                }
            }
            out
        };
        let levels = Adaptive { f: &level, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: false };
        levels.integrate(&breaks, inner_tol, false)
    };
    let outer = Adaptive { f: &per_phi, dim, rule: &rule, max_refine: quad.max_refine, parallel_nodes: options.parallel };
    let est = outer.integrate(&braid.phi_breaks, 0.9 * quad.tol, options.parallel);
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    if est.max_err() > quad.tol {
        return Err(Error::Quadrature(format!("error estimate {:.3e} above tolerance {:.1e}", est.max_err(), quad.tol)));
    }
    Ok(NumericVector::from_estimate(Kind::D1, max_degree, &basis, &est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::correction::hump;
    use crate::integrator::z1::z1_window;

    fn quad() -> QuadratureConfig {
        QuadratureConfig { tol: 1e-8, ..Default::default() }
    }

    /// Three straight strands twisting about each other at a rate that depends on `φ`.
    fn twisted(rate: f64) -> Braid<'static> {
        Braid::from_fn(vec![false; 3], (0.0, 1.0), (0.0, 1.0), move |phi, t| {
            (0..3)
                .map(|k| {
                    let angle = rate * phi * t + 2.0 * PI * k as f64 / 3.0;
                    let r = 1.0 + 0.2 * k as f64;
                    let z = Complex64::from_polar(r, angle);
                    let i = Complex64::new(0.0, 1.0);
                    PointState { z, zt: i * rate * phi * z, zp: i * rate * t * z }
                })
                .collect()
        })
    }

    #[test]
    fn strand_count_must_match() {
        assert!(matches!(z1_braid(&twisted(1.0), 4, 2, &quad()), Err(Error::StrandMismatch(4, 3))));
    }

    #[test]
    fn steady_braid_gives_zero() {
        let steady = Braid::from_fn(vec![false; 3], (0.0, 1.0), (0.0, 1.0), |_, t| {
            (0..3)
                .map(|k| PointState {
                    z: Complex64::new(k as f64, t),
                    zt: Complex64::new(0.0, 1.0),
                    zp: Complex64::new(0.0, 0.0),
                })
                .collect()
        });
        assert!(z1_braid(&steady, 3, 3, &quad()).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn two_strands_give_zero() {
        let b = Braid::from_fn(vec![false, true], (0.0, 1.0), (0.0, 1.0), |phi, _| {
            let z = Complex64::from_polar(1.0, phi);
            let i = Complex64::new(0.0, 1.0);
            vec![
                PointState { z, zt: Complex64::new(0.0, 0.0), zp: i * z },
                PointState { z: -z, zt: Complex64::new(0.0, 0.0), zp: -i * z },
            ]
        });
        assert!(z1_braid(&b, 2, 3, &quad()).unwrap().is_empty());
    }

    #[test]
    fn twisting_braid_is_finite() {
        let v = z1_braid(&twisted(2.0), 3, 3, &quad()).unwrap();
        assert!(v.max_abs().is_finite() && v.max_err() <= 1e-8);
    }

    #[test]
    fn slab_agrees_with_the_windowed_integral() {
        let path = KnotPath::rotation(hump());
        let window = (1.1, 1.9);
        let q = QuadratureConfig { tol: 1e-7, ..Default::default() };
        let braid = Braid::from_path_window(&path, window).unwrap();
        assert_eq!(braid.strands, 3);
        let slab = z1_braid(&braid, 3, 3, &q).unwrap();
        let full = z1_window(&path, window, 3, &q).unwrap();
        let diff = slab.combine(1.0, &full, -1.0).unwrap();
        for (d, c, _) in diff.iter() {
            let bound = 2.0 * (slab.err(d) + full.err(d)) + 1e-12;
            assert!(c.norm() <= bound, "{d:?}: {c} > {bound}");
        }
        assert!(slab.max_abs() > 1e-6);
    }

    #[test]
    fn window_with_a_critical_point_is_rejected() {
        let path = KnotPath::rotation(hump());
        assert!(Braid::from_path_window(&path, (0.5, 1.5)).is_err());
    }
}
