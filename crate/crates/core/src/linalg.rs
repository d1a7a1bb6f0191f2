//! Dense real vectors and row-major matrices.
//!
//! Instance dimensions stay small (at most 16 per side), so everything is
//! dense and allocation-per-product is fine. Decompositions (SVD, inverse)
//! go through `nalgebra`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates of an element of a local space or of its dual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite vector entry at index {pos}")));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn checked_dot(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot pair vectors of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.dot(other))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for RealVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &RealVector {
    type Output = RealVector;
    fn add(self, rhs: &RealVector) -> RealVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        RealVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RealVector {
    type Output = RealVector;
    fn sub(self, rhs: &RealVector) -> RealVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        RealVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries given for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite matrix entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// `u vᵀ`.
    pub fn outer(u: &RealVector, v: &RealVector) -> Self {
        let (rows, cols) = (u.dim(), v.dim());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(u[i] * v[j]);
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> RealVector {
        RealVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn matvec(&self, v: &RealVector) -> RealVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        RealVector((0..self.rows).map(|i| self.row(i).iter().zip(v.as_slice()).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    /// Largest absolute entry-wise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self { rows, cols, data }
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Number of singular values above `tol_rel` times the largest one.
    pub fn rank(&self, tol_rel: f64) -> usize {
        numerical_rank(&self.singular_values(), tol_rel)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotInvertible { rank: self.rank(crate::TOL_RANK), dim: self.rows.max(self.cols) });
        }
        let rank = self.rank(crate::TOL_RANK);
        if rank < self.rows {
            return Err(Error::NotInvertible { rank, dim: self.rows });
        }
        self.to_nalgebra()
            .try_inverse()
            .map(|m| Self::from_nalgebra(&m))
            .ok_or(Error::NotInvertible { rank, dim: self.rows })
    }

    /// Lexicographic comparison of entries rounded to `decimals` places.
    pub fn rounded_key(&self, decimals: i32) -> Vec<i64> {
        let f = 10f64.powi(decimals);
        self.data.iter().map(|x| (x * f).round() as i64).collect()
    }
}

pub(crate) fn numerical_rank(sorted_desc: &[f64], tol_rel: f64) -> usize {
    match sorted_desc.first() {
        Some(&top) if top > 0.0 => sorted_desc.iter().filter(|&&s| s > tol_rel * top).count(),
        _ => 0,
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;
    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = RealMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }
}

impl Add for &RealMatrix {
    type Output = RealMatrix;
    fn add(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum dimension mismatch");
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &RealMatrix {
    type Output = RealMatrix;
    fn sub(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference dimension mismatch");
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:>9.5}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for RealMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        RealMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Orthonormal basis (as columns) of the span of `vectors`, by modified
/// Gram-Schmidt. Vectors whose residual norm is at most `tol` are dropped.
pub fn orthonormal_span(vectors: &[RealVector], tol: f64) -> Vec<RealVector> {
    let mut basis: Vec<RealVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w = &w - &b.scale(c);
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w.scale(1.0 / n));
        }
    }
    basis
}

/// Dimension of the affine span of a point set.
pub fn affine_dimension(points: &[RealVector], tol_rel: f64) -> usize {
    let Some(first) = points.first() else { return 0 };
    if points.len() < 2 {
        return 0;
    }
    let dim = first.dim();
    let diffs: Vec<f64> = points[1..].iter().flat_map(|p| (p - first).into_inner()).collect();
    let m = DMatrix::from_row_slice(points.len() - 1, dim, &diffs);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    // absolute floor so that a cloud of coincident points has dimension 0
    if s.first().is_none_or(|&top| top <= tol_rel) {
        return 0;
    }
    numerical_rank(&s, tol_rel)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn dedup_weight(i: usize) -> f64 {
    1.0 + (i as f64 * 0.618_033_988_749_895).fract()
}

/// Insertion-ordered set of matrices identified up to a max-norm radius.
///
/// Lookups go through a one-dimensional index on a fixed positive linear
/// functional of the entries: two matrices within `eps` of each other have
/// keys within `eps * sum(weights)`, so only that key window is scanned.
#[derive(Clone, Debug)]
pub struct MatrixSet {
    eps: f64,
    index: BTreeMap<Key, Vec<usize>>,
    items: Vec<RealMatrix>,
}

impl MatrixSet {
    pub fn new(eps: f64) -> Self {
        Self { eps, index: BTreeMap::new(), items: Vec::new() }
    }

    fn key(m: &RealMatrix) -> (f64, f64) {
        let mut key = 0.0;
        let mut total = 0.0;
        for (i, x) in m.as_slice().iter().enumerate() {
            let w = dedup_weight(i);
            key += w * x;
            total += w;
        }
        (key, total)
    }

    pub fn find(&self, m: &RealMatrix) -> Option<usize> {
        let (key, total) = Self::key(m);
        let radius = self.eps * total * (1.0 + 1e-12) + 1e-300;
        self.index
            .range(Key(key - radius)..=Key(key + radius))
            .flat_map(|(_, ids)| ids.iter().copied())
            .filter(|&i| self.items[i].max_abs_diff(m) <= self.eps)
            .min()
    }

    /// Returns the index of `m` (or of the stored element it collapses onto)
    /// and whether it was newly inserted.
    pub fn insert(&mut self, m: RealMatrix) -> (usize, bool) {
        if let Some(i) = self.find(&m) {
            return (i, false);
        }
        let (key, _) = Self::key(&m);
        let id = self.items.len();
        self.index.entry(Key(key)).or_default().push(id);
        self.items.push(m);
        (id, true)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &RealMatrix {
        &self.items[i]
    }

    pub fn items(&self) -> &[RealMatrix] {
        &self.items
    }

    pub fn into_items(self) -> Vec<RealMatrix> {
        self.items
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_trace() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ab = &a * &b;
        assert_eq!(ab.to_rows(), vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(a.trace_of_product(&b), ab.trace());
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(RealMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(RealMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(RealVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rank_of_outer_product_is_one() {
        let u = RealVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        let v = RealVector::new(vec![-1.0, 0.5]).unwrap();
        assert_eq!(RealMatrix::outer(&u, &v).rank(1e-10), 1);
        assert_eq!(RealMatrix::zeros(3, 3).rank(1e-10), 0);
    }

    #[test]
    fn inverse_of_singular_matrix_fails() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::NotInvertible { rank: 1, .. })));
    }

    #[test]
    fn matrix_set_collapses_nearby_entries() {
        let mut set = MatrixSet::new(1e-7);
        let a = RealMatrix::identity(3);
        let b = &a + &RealMatrix::diagonal(&[5e-8, -5e-8, 0.0]);
        let c = RealMatrix::diagonal(&[1.0, 1.0, -1.0]);
        assert_eq!(set.insert(a), (0, true));
        assert_eq!(set.insert(b), (0, false));
        assert_eq!(set.insert(c), (1, true));
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn affine_dimension_of_triangle() {
        let pts: Vec<RealVector> = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]
            .iter()
            .map(|p| RealVector::new(p.to_vec()).unwrap())
            .collect();
        assert_eq!(affine_dimension(&pts, 1e-10), 2);
        assert_eq!(affine_dimension(&pts[..1], 1e-10), 0);
    }
}
