//! Test support shared by the integration tests: an independent Conway
//! coefficient routine for braid closures and a few fixture helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use kzcocycle::integrator::MorseKnot;

/// Laurent polynomial in `t` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Laurent(BTreeMap<i32, i64>);

impl Laurent {
    pub fn monomial(e: i32, c: i64) -> Self {
        let mut m = BTreeMap::new();
        if c != 0 {
            m.insert(e, c);
        }
        Laurent(m)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(0, c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.0.clone();
        for (&e, &c) in &o.0 {
            *m.entry(e).or_insert(0) += c;
        }
        m.retain(|_, c| *c != 0);
        Laurent(m)
    }

    pub fn neg(&self) -> Self {
        Laurent(self.0.iter().map(|(&e, &c)| (e, -c)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Laurent::default();
        for (&e1, &c1) in &self.0 {
            for (&e2, &c2) in &o.0 {
                out = out.add(&Laurent::monomial(e1 + e2, c1 * c2));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Unreduced Burau image of a braid word on `n` strands (generator `±i`
/// for `σ_i^{±1}`, 1-based).
pub fn burau(n: usize, word: &[i32]) -> Vec<Vec<Laurent>> {
    let id = |i: usize, j: usize| Laurent::constant(i64::from(i == j));
    let mut m: Vec<Vec<Laurent>> = (0..n).map(|i| (0..n).map(|j| id(i, j)).collect()).collect();
    for &g in word {
        let i = g.unsigned_abs() as usize - 1;
        let mut s: Vec<Vec<Laurent>> = (0..n).map(|a| (0..n).map(|b| id(a, b)).collect()).collect();
        let block = if g > 0 {
            [
                [Laurent::constant(1).add(&Laurent::monomial(1, -1)), Laurent::monomial(1, 1)],
                [Laurent::constant(1), Laurent::default()],
            ]
        } else {
            [
                [Laurent::default(), Laurent::constant(1)],
                [Laurent::monomial(-1, 1), Laurent::constant(1).add(&Laurent::monomial(-1, -1))],
            ]
        };
        for a in 0..2 {
            for b in 0..2 {
                s[i + a][i + b] = block[a][b].clone();
            }
        }
        m = (0..n)
            .map(|a| (0..n).map(|b| (0..n).fold(Laurent::default(), |acc, k| acc.add(&m[a][k].mul(&s[k][b])))).collect())
            .collect();
    }
    m
}

fn det(m: &[Vec<Laurent>]) -> Laurent {
    if m.is_empty() {
        return Laurent::constant(1);
    }
    let mut total = Laurent::default();
    for j in 0..m.len() {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Laurent>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = m[0][j].mul(&det(&minor));
        total = total.add(&if j % 2 == 0 { term } else { term.neg() });
    }
    total
}

/// Coefficients of the Alexander polynomial of the closure of the braid,
/// normalised to be symmetric with value 1 at `t = 1`, as a map from the
/// centred exponent to the coefficient (exponents doubled to stay integral).
pub fn alexander(n: usize, word: &[i32]) -> BTreeMap<i32, i64> {
    let b = burau(n, word);
    // I − B with the first row and column removed.
    let m: Vec<Vec<Laurent>> = (1..n)
        .map(|i| (1..n).map(|j| Laurent::constant(i64::from(i == j)).add(&b[i][j].neg())).collect())
        .collect();
    let d = det(&m);
    let lo = *d.0.keys().next().expect("nonzero Alexander polynomial");
    let hi = *d.0.keys().last().expect("nonzero Alexander polynomial");
    let sign: i64 = d.0.values().sum::<i64>().signum();
    d.0.iter().map(|(&e, &c)| (2 * e - lo - hi, sign * c)).collect()
}

/// The `z²` coefficient of the Conway polynomial of the braid closure.
pub fn conway_c2(n: usize, word: &[i32]) -> i64 {
    let a = alexander(n, word);
    assert_eq!(a.values().sum::<i64>(), 1, "Alexander polynomial must take the value 1 at t = 1");
    // t^k + t^{-k} = 2 + k² z² + O(z⁴); exponents are doubled.
    let twice: i64 = a.iter().map(|(&e, &c)| c * i64::from(e) * i64::from(e) / 4).sum();
    twice / 2
}

pub fn fixture_knot(name: &str) -> MorseKnot {
    let path = format!("{}/fixtures/knots/{name}.json", env!("CARGO_MANIFEST_DIR"));
    MorseKnot::from_json_str(&std::fs::read_to_string(&path).expect("fixture exists")).expect("fixture parses")
}
