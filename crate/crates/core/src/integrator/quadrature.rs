//! Adaptive Gauss–Legendre quadrature of vector-valued integrands.
//!
//! An interval is accepted when the rule on the whole interval agrees with
//! the rule on its two halves; otherwise both halves are refined
//! recursively. The difference between the two evaluations is reported as
//! the error of the (more accurate) halved evaluation. Cells are summed in a
//! fixed order with compensated summation so results do not depend on
//! thread scheduling.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Rule order, refinement depth and absolute tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadratureConfig {
    pub order: usize,
    pub max_refine: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 10, max_refine: 40, tol: 1e-8 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order > 200 {
            return Err(Error::Malformed(format!("quadrature order {} outside 1..=200", self.order)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Malformed(format!("quadrature tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// The same configuration with the tolerance scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { tol: self.tol * factor, ..*self }
    }
}

/// A vector value with a componentwise error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: Vec<Complex64>,
    pub err: Vec<f64>,
    /// Whether every cell met its tolerance before the depth limit.
    pub converged: bool,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

impl Estimate {
    pub fn zeros(dim: usize) -> Self {
        Self { value: vec![Complex64::new(0.0, 0.0); dim], err: vec![0.0; dim], converged: true, evaluations: 0 }
    }

    /// An exact value.
    pub fn exact(value: Vec<Complex64>) -> Self {
        let err = vec![0.0; value.len()];
        Self { value, err, converged: true, evaluations: 1 }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    /// Largest componentwise error.
    pub fn max_err(&self) -> f64 {
        self.err.iter().copied().fold(0.0, f64::max)
    }

    /// `self += w·other`, errors scaled by `|w|`.
    pub fn add_scaled(&mut self, w: f64, other: &Estimate) {
        for (v, o) in self.value.iter_mut().zip(&other.value) {
            *v += o * w;
        }
        for (e, o) in self.err.iter_mut().zip(&other.err) {
            *e += o * w.abs();
        }
        self.converged &= other.converged;
        self.evaluations += other.evaluations;
    }

    /// Multiplies values and errors by a complex constant.
    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.value {
            *v *= c;
        }
        for e in &mut self.err {
            *e *= c.norm();
        }
    }
}

/// Neumaier-compensated running sums of complex vectors.
struct CompensatedSum {
    sum: Vec<Complex64>,
    comp: Vec<Complex64>,
}

fn two_sum(s: f64, x: f64) -> (f64, f64) {
    let t = s + x;
    let c = if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
    (t, c)
}

impl CompensatedSum {
    fn new(dim: usize) -> Self {
        Self { sum: vec![Complex64::new(0.0, 0.0); dim], comp: vec![Complex64::new(0.0, 0.0); dim] }
    }

    fn add(&mut self, v: &[Complex64]) {
        for ((s, c), x) in self.sum.iter_mut().zip(&mut self.comp).zip(v) {
            let (re, cre) = two_sum(s.re, x.re);
            let (im, cim) = two_sum(s.im, x.im);
            *s = Complex64::new(re, im);
            *c += Complex64::new(cre, cim);
        }
    }

    fn total(&self) -> Vec<Complex64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let n = NonZeroUsize::new(order.max(1)).expect("positive order");
        let mut pairs = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { pairs }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
        self.pairs.iter().map(|&(x, w)| (c + h * x, h * w)).collect()
    }
}

/// Adaptive integrator over a union of cells.
pub struct Adaptive<'a, F> {
    pub f: &'a F,
    pub dim: usize,
    pub rule: &'a Rule,
    pub max_refine: usize,
    /// Evaluate the nodes of one cell in parallel.
    pub parallel_nodes: bool,
}

impl<F> Adaptive<'_, F>
where
    F: Fn(f64) -> Estimate + Sync,
{
    fn rule_on(&self, a: f64, b: f64) -> Estimate {
        let nodes = self.rule.on(a, b);
        let samples = par::map(&nodes, self.parallel_nodes, |&(x, _)| (self.f)(x));
        let mut out = Estimate::zeros(self.dim);
        let mut acc = CompensatedSum::new(self.dim);
        for ((_, w), s) in nodes.iter().zip(&samples) {
            acc.add(&s.value.iter().map(|v| v * w).collect::<Vec<_>>());
            for (e, se) in out.err.iter_mut().zip(&s.err) {
                *e += se * w.abs();
            }
            out.converged &= s.converged;
            out.evaluations += s.evaluations;
        }
        out.value = acc.total();
        out
    }

    fn refine(&self, a: f64, b: f64, whole: Estimate, depth: usize, tol: f64) -> Estimate {
        let m = 0.5 * (a + b);
        let left = self.rule_on(a, m);
        let right = self.rule_on(m, b);
        let diff: Vec<f64> =
            (0..self.dim).map(|k| (whole.value[k] - left.value[k] - right.value[k]).norm()).collect();
        let worst = diff.iter().copied().fold(0.0, f64::max);
        let exhausted = depth >= self.max_refine || !(a < m && m < b);
        if worst <= tol || exhausted {
            let mut out = Estimate::zeros(self.dim);
            out.add_scaled(1.0, &left);
            out.add_scaled(1.0, &right);
            for (e, d) in out.err.iter_mut().zip(&diff) {
                *e += d;
            }
            out.converged &= worst <= tol;
            out.evaluations += whole.evaluations;
            return out;
        }
        let mut out = self.refine(a, m, left, depth + 1, 0.5 * tol);
        let r = self.refine(m, b, right, depth + 1, 0.5 * tol);
        let mut acc = CompensatedSum::new(self.dim);
        acc.add(&out.value);
        acc.add(&r.value);
        out.add_scaled(1.0, &r);
        out.value = acc.total();
        out.evaluations += whole.evaluations;
        out
    }

    /// Integrates over `[breaks[0], breaks[last]]`, never refining across a
    /// break; `tol` is the absolute tolerance for the whole range.
    pub fn integrate(&self, breaks: &[f64], tol: f64, parallel_cells: bool) -> Estimate {
        let cells: Vec<(f64, f64)> = breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
        let total: f64 = cells.iter().map(|(a, b)| b - a).sum();
        let parts = par::map(&cells, parallel_cells, |&(a, b)| {
            let whole = self.rule_on(a, b);
            self.refine(a, b, whole, 0, tol * (b - a) / total)
        });
        let mut out = Estimate::zeros(self.dim);
        let mut acc = CompensatedSum::new(self.dim);
        for p in &parts {
            acc.add(&p.value);
            out.add_scaled(1.0, p);
        }
        out.value = acc.total();
        out
    }
}

/// Sorted, deduplicated break points within `[lo, hi]`, both ends included.
pub fn clip_breaks(points: impl IntoIterator<Item = f64>, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = points.into_iter().filter(|&x| x > lo && x < hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64 + Sync, breaks: &[f64], tol: f64) -> Estimate {
        let g = |x: f64| Estimate::exact(vec![Complex64::new(f(x), 0.0)]);
        let rule = Rule::new(8);
        Adaptive { f: &g, dim: 1, rule: &rule, max_refine: 50, parallel_nodes: false }.integrate(breaks, tol, true)
    }

    #[test]
    fn polynomials_are_exact() {
        let e = scalar(|x| 3.0 * x * x, &[0.0, 2.0], 1e-12);
        assert!((e.value[0].re - 8.0).abs() < 1e-13);
        assert!(e.converged);
    }

    #[test]
    fn endpoint_log_singularity_converges() {
        // ∫_0^1 ln x dx = −1
        let e = scalar(f64::ln, &[0.0, 1.0], 1e-10);
        assert!((e.value[0].re + 1.0).abs() < 1e-9, "{:?}", e.value);
        assert!(e.max_err() < 1e-9);
        assert!((e.value[0].re + 1.0).abs() <= e.max_err() + 1e-15);
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let g = |x: f64| Estimate::exact(vec![Complex64::new(x.sin(), x.cos()), Complex64::new(x.sqrt(), 0.0)]);
        let rule = Rule::new(6);
        let run = |p: bool| {
            Adaptive { f: &g, dim: 2, rule: &rule, max_refine: 30, parallel_nodes: p }.integrate(&[0.0, 1.0, 3.0], 1e-10, p)
        };
        assert_eq!(run(true), run(false));
    }

    #[test]
    fn config_json() {
        let c = QuadratureConfig::from_json_str(r#"{"order":12,"maxRefine":20,"tol":1e-9}"#).unwrap();
        assert_eq!(c, QuadratureConfig { order: 12, max_refine: 20, tol: 1e-9 });
        assert!(QuadratureConfig::from_json_str(r#"{"order":0,"maxRefine":20,"tol":1e-9}"#).is_err());
    }
}
