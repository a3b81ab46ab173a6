//! Exact sparse linear algebra over the rationals.
//!
//! Everything here works on [`Q`] (arbitrary-precision rationals). Matrices
//! are stored sparsely, one ordered map per row, and converted to dense form
//! for elimination; the matrices that appear in this crate have at most a
//! few hundred columns.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or an integer literal. Decimal points are rejected.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a fraction: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Sparse matrix over `Q`. No stored entry is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRationalMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<BTreeMap<usize, Q>>,
}

impl SparseRationalMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, rows: vec![BTreeMap::new(); n_rows] }
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), n_cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged dense matrix");
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let dense: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect();
        Self::from_dense(&dense)
    }

    /// Builds a matrix from row vectors of common length `n_cols`.
    pub fn from_rows(n_cols: usize, rows: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows.len(), n_cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols);
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        assert!(r < self.n_rows && c < self.n_cols, "index ({r},{c}) out of range");
        if v.is_zero() {
            self.rows[r].remove(&c);
        } else {
            self.rows[r].insert(c, v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Q) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.rows[r].get(&c).cloned().unwrap_or_else(Q::zero)
    }

    pub fn row(&self, r: usize) -> &BTreeMap<usize, Q> {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// `(row, col, value)` triples in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Q)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut d = vec![vec![Q::zero(); self.n_cols]; self.n_rows];
        for (r, c, v) in self.entries() {
            d[r][c] = v.clone();
        }
        d
    }

    pub fn dense_row(&self, r: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.n_cols];
        for (c, x) in &self.rows[r] {
            v[*c] = x.clone();
        }
        v
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for (r, c, v) in self.entries() {
            t.set(c, r, v.clone());
        }
        t
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.n_cols);
        self.rows
            .iter()
            .map(|row| row.iter().fold(Q::zero(), |acc, (c, x)| acc + x * &v[*c]))
            .collect()
    }

    /// `vᵀ · self`.
    pub fn vec_mul(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.n_rows);
        let mut out = vec![Q::zero(); self.n_cols];
        for (r, c, x) in self.entries() {
            if !v[r].is_zero() {
                out[c] += x * &v[r];
            }
        }
        out
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.n_cols != other.n_cols {
            return Err(Error::ColumnMismatch(self.n_cols, other.n_cols));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self { n_rows: rows.len(), n_cols: self.n_cols, rows })
    }

    /// Columns `[from, to)` as a new matrix.
    pub fn column_block(&self, from: usize, to: usize) -> Self {
        assert!(from <= to && to <= self.n_cols);
        let mut m = Self::zeros(self.n_rows, to - from);
        for (r, c, v) in self.entries() {
            if (from..to).contains(&c) {
                m.set(r, c - from, v.clone());
            }
        }
        m
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.n_rows, other.n_rows);
        let mut m = Self::zeros(self.n_rows, self.n_cols + other.n_cols);
        for (r, c, v) in self.entries() {
            m.set(r, c, v.clone());
        }
        for (r, c, v) in other.entries() {
            m.set(r, self.n_cols + c, v.clone());
        }
        m
    }

    pub fn scale_row(&mut self, r: usize, s: &Q) {
        if s.is_zero() {
            self.rows[r].clear();
        } else {
            for v in self.rows[r].values_mut() {
                *v = &*v * s;
            }
        }
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.n_rows,
            cols: self.n_cols,
            entries: self.entries().map(|(r, c, v)| (r, c, fmt_q(v))).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let mut m = Self::zeros(j.rows, j.cols);
        for (r, c, v) in &j.entries {
            if *r >= j.rows || *c >= j.cols {
                return Err(Error::Parse(format!("entry ({r},{c}) out of range")));
            }
            if m.rows[*r].contains_key(c) {
                return Err(Error::Parse(format!("duplicate entry ({r},{c})")));
            }
            m.set(*r, *c, parse_q(v)?);
        }
        Ok(m)
    }
}

/// Wire format: `{"rows": R, "cols": C, "entries": [[r, c, "p/q"], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String)>,
}

/// Reduced row echelon form of a dense matrix. Pivots are chosen by
/// smallest column index; returns the pivot columns.
pub fn rref(m: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(n_rows);
    pivots
}

pub fn rank(m: &SparseRationalMatrix) -> usize {
    rref(&mut m.to_dense()).len()
}

/// Basis of `{v : M v = 0}`, returned in reduced echelon form.
pub fn kernel_basis(m: &SparseRationalMatrix) -> Vec<Vec<Q>> {
    let n = m.n_cols();
    let mut d = m.to_dense();
    let pivots = rref(&mut d);
    let mut basis = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); n];
        v[f] = Q::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -d[i][f].clone();
        }
        basis.push(v);
    }
    echelon_rows(basis, n)
}

/// Basis of `{x : xᵀ M = 0}`.
pub fn transpose_kernel_basis(m: &SparseRationalMatrix) -> Vec<Vec<Q>> {
    kernel_basis(&m.transpose())
}

/// Reduced echelon basis for the span of `rows` (zero rows dropped).
pub fn echelon_rows(rows: Vec<Vec<Q>>, n_cols: usize) -> Vec<Vec<Q>> {
    if rows.is_empty() {
        return rows;
    }
    let mut d = rows;
    for r in &d {
        assert_eq!(r.len(), n_cols);
    }
    let k = rref(&mut d).len();
    d.truncate(k);
    d
}

pub fn rank_of_rows(rows: &[Vec<Q>], n_cols: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rank(&SparseRationalMatrix::from_rows(n_cols, rows))
}

/// True iff the row spaces of `a` and `b` coincide.
pub fn row_space_equal(a: &SparseRationalMatrix, b: &SparseRationalMatrix) -> Result<bool> {
    let stacked = a.vstack(b)?;
    let (ra, rb, rs) = (rank(a), rank(b), rank(&stacked));
    Ok(ra == rb && rb == rs)
}

/// True iff `v` lies in the row space of `m`.
pub fn in_row_space(m: &SparseRationalMatrix, v: &[Q]) -> bool {
    let extra = SparseRationalMatrix::from_rows(m.n_cols(), &[v.to_vec()]);
    let stacked = m.vstack(&extra).expect("same width");
    rank(&stacked) == rank(m)
}

/// Precomputed reduced echelon basis of a row space, for repeated
/// membership and equality tests.
#[derive(Clone, Debug)]
pub struct RowSpace {
    n_cols: usize,
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &SparseRationalMatrix) -> Self {
        let mut d = m.to_dense();
        let pivots = rref(&mut d);
        d.truncate(pivots.len());
        Self { n_cols: m.n_cols(), rows: d, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Whether `v` reduces to zero against the basis.
    pub fn contains(&self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.n_cols);
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (x, y) in w.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        is_zero_vec(&w)
    }

    /// Whether the span of `rows` equals this space.
    pub fn equals_span(&self, rows: &[Vec<Q>]) -> bool {
        rows.iter().all(|r| self.contains(r)) && rank_of_rows(rows, self.n_cols) == self.dim()
    }
}

/// Row combinations of `m` that vanish on the first `left_width` columns.
///
/// Returns the induced rows `xᵀ·R` where `x` runs over a basis of the
/// left kernel of the left block and `R` is the right block.
pub fn eliminate_left(m: &SparseRationalMatrix, left_width: usize) -> Vec<Vec<Q>> {
    let (left, right) = split_left(m, left_width);
    transpose_kernel_basis(&left).iter().map(|x| right.vec_mul(x)).collect()
}

/// Same as [`eliminate_left`] but also returns the combining vectors.
pub fn eliminate_left_with_combinations(
    m: &SparseRationalMatrix,
    left_width: usize,
) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let (left, right) = split_left(m, left_width);
    let xs = transpose_kernel_basis(&left);
    let rows = xs.iter().map(|x| right.vec_mul(x)).collect();
    (xs, rows)
}

fn split_left(m: &SparseRationalMatrix, left_width: usize) -> (SparseRationalMatrix, SparseRationalMatrix) {
    assert!(left_width < m.n_cols(), "left block must leave at least one column");
    (m.column_block(0, left_width), m.column_block(left_width, m.n_cols()))
}

/// Whether all entries of `v` are zero.
pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Number of nonzero entries.
pub fn support(v: &[Q]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}

pub fn abs_max(v: &[Q]) -> Q {
    v.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_has_full_rank() {
        let id: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| i64::from(i == j)).collect()).collect();
        let m = SparseRationalMatrix::from_i64(&id);
        assert_eq!(rank(&m), 5);
        assert!(kernel_basis(&m).is_empty());
    }

    #[test]
    fn rank_one_kernel() {
        let m = SparseRationalMatrix::from_i64(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(rank(&m), 1);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        // proportional to (2, -1)
        assert_eq!(&k[0][0] * qi(-1), &k[0][1] * qi(2));
    }

    #[test]
    fn row_space_permuted_and_rescaled() {
        let a = SparseRationalMatrix::from_i64(&[vec![1, 0, 2], vec![0, 1, 3]]);
        let b = SparseRationalMatrix::from_i64(&[vec![0, 3, 9], vec![-2, 0, -4]]);
        assert!(row_space_equal(&a, &b).unwrap());
        let c = a.vstack(&SparseRationalMatrix::from_i64(&[vec![0, 0, 1]])).unwrap();
        assert!(!row_space_equal(&a, &c).unwrap());
        let narrow = SparseRationalMatrix::from_i64(&[vec![1, 0]]);
        assert!(matches!(row_space_equal(&a, &narrow), Err(Error::ColumnMismatch(3, 2))));
    }

    #[test]
    fn eliminate_left_small() {
        let m = SparseRationalMatrix::from_i64(&[vec![1, 5], vec![1, 7]]);
        let (xs, rows) = eliminate_left_with_combinations(&m, 1);
        assert_eq!(rows.len(), 1);
        // x proportional to (1, -1), row proportional to (-2)
        assert_eq!(xs[0][0], -xs[0][1].clone());
        assert_eq!(rows[0][0], &xs[0][0] * qi(-2));
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!(parse_q("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("0.5").is_err());
        assert!(parse_q("1/0").is_err());
        assert_eq!(fmt_q(&q(4, -6)), "-2/3");
    }

    #[test]
    fn json_roundtrip_and_rejects_duplicates() {
        let m = SparseRationalMatrix::from_dense(&[vec![q(1, 2), qi(0)], vec![qi(0), qi(-3)]]);
        let j = m.to_json();
        assert_eq!(SparseRationalMatrix::from_json(&j).unwrap(), m);
        let mut bad = j.clone();
        bad.entries.push((0, 0, "1".into()));
        assert!(SparseRationalMatrix::from_json(&bad).is_err());
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-2i64..3, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_nullity_and_kernel_exactness(rows in small_matrix()) {
            let m = SparseRationalMatrix::from_i64(&rows);
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.len(), m.n_cols());
            prop_assert_eq!(rank(&m), rank(&m.transpose()));
            for v in &k {
                prop_assert!(is_zero_vec(&m.mul_vec(v)));
            }
        }

        #[test]
        fn eliminated_rows_are_independent(rows in small_matrix(), w in 0usize..3) {
            let m = SparseRationalMatrix::from_i64(&rows);
            prop_assume!(w < m.n_cols());
            let (xs, out) = eliminate_left_with_combinations(&m, w);
            let left = m.column_block(0, w);
            for x in &xs {
                prop_assert!(is_zero_vec(&left.vec_mul(x)));
            }
            prop_assert_eq!(rank_of_rows(&xs, m.n_rows()), xs.len());
            prop_assert_eq!(out.len(), xs.len());
        }
    }
}
