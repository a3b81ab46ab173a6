//! Complex coefficient vectors on diagrams with per-coefficient error bounds.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::normal::{normal_form, weight_space, Basis};
use super::quadrature::Estimate;
use crate::diagrams::{Diagram, DiagramJson, FormalSum, Kind, Series};
use crate::error::{Error, Result};
use crate::ratlinalg::Q;

/// Relative size of floating-point rounding folded into every error bound.
const ROUNDING: f64 = 1e-13;

/// A truncated element of the diagram space with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericVector {
    pub kind: Kind,
    pub max_degree: usize,
    terms: BTreeMap<Diagram, (Complex64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    diagram: DiagramJson,
    re: f64,
    im: f64,
    err: f64,
}

#[derive(Serialize, Deserialize)]
struct VectorJson {
    degree: usize,
    kind: Kind,
    terms: Vec<TermJson>,
}

fn check_kind(kind: Kind) -> Result<()> {
    match kind {
        Kind::D0 | Kind::D1 => Ok(()),
        k => Err(Error::WrongKind { expected: "D0 or D1".into(), got: k.to_string() }),
    }
}

impl NumericVector {
    pub fn zero(kind: Kind, max_degree: usize) -> Self {
        Self { kind, max_degree, terms: BTreeMap::new() }
    }

    /// Collects an estimate laid out over `basis`.
    pub fn from_estimate(kind: Kind, max_degree: usize, basis: &Basis, est: &Estimate) -> Self {
        let mut v = Self::zero(kind, max_degree);
        for (i, d) in basis.diagrams.iter().enumerate() {
            v.add_term(d.clone(), est.value[i], est.err[i]);
        }
        v
    }

    /// Adds `c ± err` at `d`, skipping exact zeros.
    pub fn add_term(&mut self, d: Diagram, c: Complex64, err: f64) {
        if d.degree() > self.max_degree {
            return;
        }
        let zero = Complex64::new(0.0, 0.0);
        let e = self.terms.entry(d.clone()).or_insert((zero, 0.0));
        e.0 += c;
        e.1 += err;
        if e.0 == zero && e.1 == 0.0 {
            self.terms.remove(&d);
        }
    }

    pub fn coeff(&self, d: &Diagram) -> Complex64 {
        self.terms.get(d).map_or(Complex64::new(0.0, 0.0), |v| v.0)
    }

    pub fn err(&self, d: &Diagram) -> f64 {
        self.terms.get(d).map_or(0.0, |v| v.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Diagram, Complex64, f64)> {
        self.terms.iter().map(|(d, v)| (d, v.0, v.1))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest error bound over all coefficients.
    pub fn max_err(&self) -> f64 {
        self.terms.values().map(|v| v.1).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.0.norm()).fold(0.0, f64::max)
    }

    /// Terms of one degree.
    pub fn degree_part(&self, m: usize) -> Self {
        let mut out = Self::zero(self.kind, self.max_degree);
        out.terms = self.terms.iter().filter(|(d, _)| d.degree() == m).map(|(d, v)| (d.clone(), *v)).collect();
        out
    }

    /// `a·self + b·other`, errors combined by `|a|·e + |b|·e'`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.kind != other.kind {
            return Err(Error::WrongKind { expected: self.kind.to_string(), got: other.kind.to_string() });
        }
        let mut out = Self::zero(self.kind, self.max_degree.min(other.max_degree));
        for (d, c, e) in self.iter() {
            out.add_term(d.clone(), c * a, e * a.abs());
        }
        for (d, c, e) in other.iter() {
            out.add_term(d.clone(), c * b, e * b.abs());
        }
        Ok(out)
    }

    /// Rewrites every coefficient on its normal form modulo 1T and 2T.
    pub fn normalized(&self) -> Self {
        let mut out = Self::zero(self.kind, self.max_degree);
        for (d, c, e) in self.iter() {
            if let Some((r, s)) = normal_form(d) {
                out.add_term(r, c * f64::from(s), e);
            }
        }
        out
    }

    /// The representative orthogonal to every relator: the orthogonal
    /// projection of the V-diagram part onto the weight-system space, degree
    /// by degree. Weight systems take the same value on both vectors.
    pub fn canonical(&self) -> Result<Self> {
        if self.kind != Kind::D1 {
            return Err(Error::WrongKind { expected: "D1".into(), got: self.kind.to_string() });
        }
        let mut out = Self::zero(Kind::D1, self.max_degree);
        for m in 2..=self.max_degree.min(3) {
            let ws = weight_space(m)?;
            let x: Vec<Complex64> = ws.diagrams.iter().map(|d| self.coeff(d)).collect();
            let ex: Vec<f64> = ws.diagrams.iter().map(|d| self.err(d)).collect();
            let scale = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
            let mut ey = vec![0.0; x.len()];
            for e in &ws.orthonormal {
                let c: Complex64 = e.iter().zip(&x).map(|(a, b)| b * a).sum();
                let ce: f64 = e.iter().zip(&ex).map(|(a, b)| a.abs() * b).sum();
                for k in 0..x.len() {
                    y[k] += c * e[k];
                    ey[k] += ce * e[k].abs();
                }
            }
            for (k, d) in ws.diagrams.iter().enumerate() {
                out.add_term(d.clone(), y[k], ey[k] + ROUNDING * (scale + y[k].norm()));
            }
        }
        if self.terms.keys().any(|d| d.degree() > 3) {
            return Err(Error::Unsupported("canonical form above degree 3".into()));
        }
        Ok(out)
    }

    /// Values of the exact weight-system basis of degree `m` with error bounds.
    pub fn weight_values(&self, m: usize) -> Result<Vec<(Complex64, f64)>> {
        let ws = weight_space(m)?;
        Ok(ws
            .exact
            .iter()
            .map(|w| {
                let mut v = Complex64::new(0.0, 0.0);
                let mut e = 0.0;
                for (d, c) in ws.diagrams.iter().zip(w) {
                    let c = c.to_f64().unwrap_or(f64::NAN);
                    v += self.coeff(d) * c;
                    e += self.err(d) * c.abs();
                }
                (v, e)
            })
            .collect())
    }

    /// Truncated series of a D0 vector (the empty diagram included).
    pub fn to_series(&self) -> Result<Series<Complex64>> {
        if self.kind != Kind::D0 {
            return Err(Error::WrongKind { expected: "D0".into(), got: self.kind.to_string() });
        }
        let mut s = FormalSum::zero();
        for (d, c, _) in self.iter() {
            s.add_term(d.clone(), c);
        }
        Series::from_sum(&s, self.max_degree)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = VectorJson {
            degree: self.max_degree,
            kind: self.kind,
            terms: self
                .iter()
                .map(|(d, c, e)| TermJson { diagram: d.to_json(), re: c.re, im: c.im, err: e })
                .collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: VectorJson = serde_json::from_value(v.clone())?;
        check_kind(j.kind)?;
        let mut out = Self::zero(j.kind, j.degree);
        for t in &j.terms {
            let d = Diagram::from_json(&t.diagram)?;
            if d.kind() != j.kind {
                return Err(Error::WrongKind { expected: j.kind.to_string(), got: d.kind().to_string() });
            }
            out.add_term(d, Complex64::new(t.re, t.im), t.err);
        }
        Ok(out)
    }
}

/// `Σ_D w_D·v_D` with its error bound.
pub fn eval_functional(w: &FormalSum<Q>, v: &NumericVector) -> Result<(Complex64, f64)> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (d, c) in w.iter() {
        if d.kind() != v.kind {
            return Err(Error::WrongKind { expected: v.kind.to_string(), got: d.kind().to_string() });
        }
        let c = c.to_f64().unwrap_or(f64::NAN);
        total += v.coeff(d) * c;
        err += v.err(d) * c.abs();
    }
    Ok((total, err))
}
