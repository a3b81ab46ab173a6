//! Numerical subcommands: the Kontsevich integral, the 1-cocycle integral on
//! a path or the rotation loop, and the rotation-loop cross-check.

use num_complex::Complex64;
use serde_json::{json, Value};

use super::report::RunReport;
use crate::error::Result;
use crate::integrator::correction::{correct_z1, z_hat_with, z_infinity};
use crate::integrator::kontsevich::{crossing, kontsevich_z_with};
use crate::integrator::{
    eval_functional, gramain, reduced_gramain_oracle, z1_with, KnotPath, MorseKnot, NumericVector, QuadratureConfig,
    Z1Options,
};
use crate::relations::relation_matrix;

/// A relator functional may reach this multiple of its error bound.
pub const RELATOR_ERROR_FACTOR: f64 = 10.0;
/// Relative agreement required between the full and the reduced rotation
/// integrals.
pub const GRAMAIN_RELATIVE_TOLERANCE: f64 = 5e-3;

fn complex_json(c: Complex64, err: f64) -> Value {
    json!({ "re": c.re, "im": c.im, "err": err })
}

/// Values of every weight-system basis functional in degrees `2..=max_degree`.
pub fn weight_values_json(v: &NumericVector) -> Result<Value> {
    let mut out = serde_json::Map::new();
    for m in 2..=v.max_degree {
        let vals = v.weight_values(m)?;
        out.insert(m.to_string(), Value::Array(vals.iter().map(|&(c, e)| complex_json(c, e)).collect()));
    }
    Ok(Value::Object(out))
}

/// Checks that every relator functional is within its error bound.
pub fn check_relators(r: &mut RunReport, v: &NumericVector) -> Result<()> {
    for m in 2..=v.max_degree {
        let rm = relation_matrix(m)?;
        let mut worst = 0.0f64;
        let mut ok = true;
        for row in 0..rm.matrix.n_rows() {
            let (val, err) = eval_functional(&rm.functional(&rm.matrix.dense_row(row)), v)?;
            ok &= val.norm() <= RELATOR_ERROR_FACTOR * err;
            worst = worst.max(val.norm());
        }
        r.check(
            &format!("degree {m}: relator functionals within {RELATOR_ERROR_FACTOR}x error"),
            ok,
            format!("{} relators, largest |value| {worst:.3e}", rm.matrix.n_rows()),
        );
    }
    Ok(())
}

/// `|a − b| ≤ rel·max(|a|, |b|)`, or within the combined error bounds when
/// both values vanish up to quadrature error.
pub fn agree(a: (Complex64, f64), b: (Complex64, f64), rel: f64) -> bool {
    let diff = (a.0 - b.0).norm();
    diff <= rel * a.0.norm().max(b.0.norm()) || diff <= RELATOR_ERROR_FACTOR * (a.1 + b.1)
}

pub fn z(knot: &MorseKnot, text: &[u8], max_degree: usize, quad: &QuadratureConfig, parallel: bool) -> Result<RunReport> {
    let mut r = RunReport::new(&format!("z --max-degree {max_degree}"), &[text, quad_bytes(quad).as_bytes()]);
    let v = kontsevich_z_with(knot, max_degree, quad, parallel)?;
    let c = knot.critical_count();
    let mut outputs = json!({ "criticalPoints": c, "z": v.to_json() });
    if max_degree >= 2 {
        let x = v.coeff(&crossing());
        r.check("crossing coefficient is real", x.im.abs() <= RELATOR_ERROR_FACTOR * v.err(&crossing()).max(quad.tol), x.to_string());
        if c.is_multiple_of(2) {
            let zinf = z_infinity(quad)?;
            let hat = z_hat_with(knot, &zinf, quad)?;
            outputs["zHat"] = hat.to_json();
            outputs["correctedCrossing"] = complex_json(hat.coeff(&crossing()), hat.err(&crossing()));
        } else {
            r.skip("correction", "odd number of critical points");
        }
    }
    r.outputs = outputs;
    Ok(r)
}

fn quad_bytes(quad: &QuadratureConfig) -> String {
    serde_json::to_string(quad).unwrap_or_default()
}

fn z1_report(command: &str, inputs: &[&[u8]], path: &KnotPath, max_degree: usize, quad: &QuadratureConfig, parallel: bool) -> Result<(RunReport, NumericVector)> {
    let q = quad_bytes(quad);
    let mut all: Vec<&[u8]> = inputs.to_vec();
    all.push(q.as_bytes());
    let mut r = RunReport::new(command, &all);
    let v = z1_with(path, max_degree, quad, &Z1Options { parallel, ..Default::default() })?.canonical()?;
    check_relators(&mut r, &v)?;
    r.outputs = json!({ "z1": v.to_json(), "weights": weight_values_json(&v)? });
    Ok((r, v))
}

pub fn z1_path(path: &KnotPath, text: &[u8], max_degree: usize, quad: &QuadratureConfig, parallel: bool) -> Result<RunReport> {
    Ok(z1_report(&format!("z1 --max-degree {max_degree}"), &[text], path, max_degree, quad, parallel)?.0)
}

pub fn z1_gramain(knot: &MorseKnot, text: &[u8], max_degree: usize, quad: &QuadratureConfig, parallel: bool) -> Result<RunReport> {
    let path = gramain(knot.clone());
    let (mut r, raw) = z1_report(&format!("z1 gramain --max-degree {max_degree}"), &[text], &path, max_degree, quad, parallel)?;
    if knot.critical_count().is_multiple_of(2) {
        let hat = correct_z1(&raw, knot.critical_count(), &z_infinity(quad)?)?;
        r.outputs["zHat1"] = hat.to_json();
        r.outputs["zHat1Weights"] = weight_values_json(&hat)?;
    }
    Ok(r)
}

pub fn consistency_gramain(knot: &MorseKnot, text: &[u8], max_degree: usize, quad: &QuadratureConfig, parallel: bool) -> Result<RunReport> {
    let path = gramain(knot.clone());
    let (mut r, full) =
        z1_report(&format!("consistency gramain --max-degree {max_degree}"), &[text], &path, max_degree, quad, parallel)?;
    let reduced = reduced_gramain_oracle(knot, max_degree, quad)?;
    for m in 2..=max_degree {
        let (a, b) = (full.weight_values(m)?, reduced.weight_values(m)?);
        for (k, (x, y)) in a.iter().zip(&b).enumerate() {
            r.check(
                &format!("degree {m} weight {k}: full and reduced rotation integrals agree"),
                agree(*x, *y, GRAMAIN_RELATIVE_TOLERANCE),
                format!("{:.9} vs {:.9}", x.0, y.0),
            );
        }
    }
    r.outputs["reduced"] = reduced.to_json();
    r.outputs["reducedWeights"] = weight_values_json(&reduced)?;
    Ok(r)
}
