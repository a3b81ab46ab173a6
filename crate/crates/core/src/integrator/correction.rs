//! The hump correction: `Ẑ(K) = Z(∞)^{−c/2}·Z(K)` and
//! `Ẑ¹(μ) = Z(∞)^{−c/2}·Z¹(μ)` for an even number `c` of critical points.

use num_complex::Complex64;

use super::knot::MorseKnot;
use super::kontsevich::kontsevich_z;
use super::path::KnotPath;
use super::quadrature::QuadratureConfig;
use super::vector::NumericVector;
use super::z1::z1;
use crate::diagrams::{series_mul, series_pow, Kind, Series};
use crate::error::{Error, Result};

/// Degree of the Kontsevich integral available for the correction.
const MAX_CORRECTION_DEGREE: usize = 2;

/// The shipped hump: a Morse unknot with two critical points.
pub fn hump() -> MorseKnot {
    MorseKnot::from_json_str(include_str!("../../fixtures/knots/hump.json")).expect("built-in hump parses")
}

/// `Z(∞)` up to degree 2.
pub fn z_infinity(quad: &QuadratureConfig) -> Result<NumericVector> {
    kontsevich_z(&hump(), MAX_CORRECTION_DEGREE, quad)
}

fn half_count(c: usize) -> Result<i32> {
    if !c.is_multiple_of(2) {
        return Err(Error::NotMorse(format!("odd number {c} of critical points")));
    }
    i32::try_from(c / 2).map_err(|_| Error::Unsupported("critical count".into()))
}

/// `Z(∞)^{−c/2}` as a truncated series with the error bound of its linear
/// part (the degree-1 part of `Z(∞)` vanishes, so up to degree 3 the series is
/// `1 − (c/2)·(Z(∞) − 1)`).
fn correction_series(zinf: &NumericVector, c: usize, degree: usize) -> Result<(Series<Complex64>, NumericVector)> {
    let half = half_count(c)?;
    let s = series_pow(&zinf.to_series()?, -half, degree.min(zinf.max_degree))?;
    let mut out = NumericVector::zero(Kind::D0, s.truncation());
    for (d, coeff) in s.to_sum().iter() {
        out.add_term(d.clone(), *coeff, f64::from(half) * zinf.err(d));
    }
    Ok((s, out))
}

/// `Ẑ(k)` up to degree 2 with a precomputed `Z(∞)`.
pub fn z_hat_with(knot: &MorseKnot, zinf: &NumericVector, quad: &QuadratureConfig) -> Result<NumericVector> {
    let (corr, corr_err) = correction_series(zinf, knot.critical_count(), MAX_CORRECTION_DEGREE)?;
    let z = kontsevich_z(knot, MAX_CORRECTION_DEGREE, quad)?;
    let prod = series_mul(&corr, &z.to_series()?, MAX_CORRECTION_DEGREE)?;
    let mut out = NumericVector::zero(Kind::D0, MAX_CORRECTION_DEGREE);
    for (d, coeff) in prod.to_sum().iter() {
        out.add_term(d.clone(), *coeff, z.err(d) + corr_err.err(d));
    }
    Ok(out)
}

/// `Ẑ(k)` up to degree 2.
pub fn z_hat(knot: &MorseKnot, quad: &QuadratureConfig) -> Result<NumericVector> {
    z_hat_with(knot, &z_infinity(quad)?, quad)
}

/// `series · v` for a D0 series on the left of a D1 vector, truncated at the
/// degree of `v`.
pub fn left_multiply(series: &NumericVector, v: &NumericVector) -> Result<NumericVector> {
    if series.kind != Kind::D0 || v.kind != Kind::D1 {
        return Err(Error::WrongKind { expected: "D0 · D1".into(), got: format!("{} · {}", series.kind, v.kind) });
    }
    let mut out = NumericVector::zero(Kind::D1, v.max_degree);
    for (a, ca, ea) in series.iter() {
        for (b, cb, eb) in v.iter() {
            if a.degree() + b.degree() <= v.max_degree {
                out.add_term(a.juxtapose(b)?, ca * cb, ca.norm() * eb + ea * cb.norm() + ea * eb);
            }
        }
    }
    Ok(out)
}

/// `Ẑ¹(path)` up to degree `max_degree ∈ {2, 3}` with a precomputed `Z(∞)`,
/// as the representative orthogonal to every relator.
pub fn z_hat1_with(
    path: &KnotPath,
    max_degree: usize,
    zinf: &NumericVector,
    quad: &QuadratureConfig,
) -> Result<NumericVector> {
    correct_z1(&z1(path, max_degree, quad)?, path.critical_count(), zinf)
}

/// Applies the hump correction for `critical_count` critical points to an
/// already computed 1-cocycle integral.
pub fn correct_z1(raw: &NumericVector, critical_count: usize, zinf: &NumericVector) -> Result<NumericVector> {
    // The lowest V-diagrams have degree 2, so the correction is needed up to
    // degree `max_degree − 2`.
    let (_, corr) = correction_series(zinf, critical_count, raw.max_degree.saturating_sub(2))?;
    left_multiply(&corr, raw)?.canonical()
}

/// `Ẑ¹(path)` up to degree `max_degree ∈ {2, 3}`.
pub fn z_hat1(path: &KnotPath, max_degree: usize, quad: &QuadratureConfig) -> Result<NumericVector> {
    z_hat1_with(path, max_degree, &z_infinity(quad)?, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::kontsevich::crossing;

    #[test]
    fn corrected_hump_is_trivial() {
        let quad = QuadratureConfig { tol: 1e-9, ..Default::default() };
        let z = z_hat(&hump(), &quad).unwrap();
        let x = z.coeff(&crossing());
        assert!(x.norm() <= 1e-9 + z.err(&crossing()), "{x}");
        assert_eq!(z.coeff(&crate::diagrams::Diagram::empty()), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn infinity_coefficient_is_real() {
        let zinf = z_infinity(&QuadratureConfig::default()).unwrap();
        let x = zinf.coeff(&crossing());
        assert!(x.im.abs() < 1e-9 && x.re > 0.0, "{x}");
    }

    #[test]
    fn odd_critical_count_is_rejected() {
        let zinf = z_infinity(&QuadratureConfig::default()).unwrap();
        assert!(correction_series(&zinf, 3, 2).is_err());
    }

    #[test]
    fn degree_three_correction_leaves_the_cocycle_unchanged() {
        let quad = QuadratureConfig { tol: 1e-7, ..Default::default() };
        let path = KnotPath::rotation(hump());
        let zinf = z_infinity(&quad).unwrap();
        let a = z_hat1_with(&path, 3, &zinf, &quad).unwrap();
        let b = z1(&path, 3, &quad).unwrap();
        assert!(a.combine(1.0, &b, -1.0).unwrap().max_abs() < 1e-12);
    }
}
