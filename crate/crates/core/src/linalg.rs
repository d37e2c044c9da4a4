//! Dense row-major matrices and the handful of factorizations the solver and
//! the subspace models need. Anything spectral is delegated to `nalgebra`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a `d x k` matrix whose columns are the given vectors.
    pub fn from_columns(d: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(d, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..d {
                m.data[i * cols.len() + j] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            let dst = out.row_mut(i);
            for (k, &aik) in row.iter().enumerate() {
                if aik != 0.0 {
                    axpy(aik, other.row(k), dst);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Largest Euclidean column norm.
    pub fn max_column_norm(&self) -> f64 {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sq.iter_mut().zip(self.row(i)) {
                *s += v * v;
            }
        }
        sq.into_iter().fold(0.0, f64::max).sqrt()
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Matrix {
        let mut out = Matrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| alpha * v).collect()
}

/// Solves the square system `m x = rhs` (`m` row-major, `n x n`) by Gaussian
/// elimination with partial pivoting. Returns `None` when a pivot is below
/// `tol` times the largest entry.
pub fn lu_solve(n: usize, m: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut x = rhs.to_vec();
    let scale = norm_inf(&a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let piv = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f != 0.0 {
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= a[k * n + j] * x[j];
        }
        x[k] = s / a[k * n + k];
    }
    Some(x)
}

/// Inverts a square row-major matrix by Gauss-Jordan elimination with
/// partial pivoting.
pub fn invert(n: usize, m: &[f64]) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale = norm_inf(&a).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
                inv.swap(k * n + j, p * n + j);
            }
        }
        let piv = a[k * n + k];
        for j in 0..n {
            a[k * n + j] /= piv;
            inv[k * n + j] /= piv;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i * n + k];
            if f != 0.0 {
                for j in 0..n {
                    a[i * n + j] -= f * a[k * n + j];
                    inv[i * n + j] -= f * inv[k * n + j];
                }
            }
        }
    }
    Some(inv)
}

/// Orthogonalizes `v` against the orthonormal set `basis` (two passes of
/// modified Gram-Schmidt). Returns the normalized residual, or `None` when
/// the residual norm is at most `tol`.
pub fn orthonormalize_against(basis: &[Vec<f64>], v: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let p = dot(q, &r);
            axpy(-p, q, &mut r);
        }
    }
    let n = norm(&r);
    if n <= tol {
        return None;
    }
    for x in r.iter_mut() {
        *x /= n;
    }
    Some(r)
}

/// Orthonormal basis of the span of `vectors`, processed in order; vectors
/// whose residual is at most `tol` are skipped.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if let Some(q) = orthonormalize_against(&basis, v, tol) {
            basis.push(q);
        }
    }
    basis
}

/// Completes an orthonormal set `q` in `R^d` using the standard basis
/// vectors `e_1, e_2, ...` in index order. Returns only the new vectors.
pub fn complete_basis(q: &[Vec<f64>], d: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = q.to_vec();
    let mut extra = Vec::new();
    for i in 0..d {
        if all.len() == d {
            break;
        }
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        if let Some(v) = orthonormalize_against(&all, &e, tol) {
            all.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    orthonormal_basis(vectors, tol).len()
}

/// Sine of the largest principal angle between `range(qa)` and its
/// projection onto `range(qb)`; both arguments are orthonormal column sets.
/// Zero means `range(qa)` lies inside `range(qb)`.
pub fn containment_sine(qa: &[Vec<f64>], qb: &[Vec<f64>]) -> f64 {
    if qa.is_empty() {
        return 0.0;
    }
    let d = qa[0].len();
    let residuals: Vec<Vec<f64>> = qa
        .iter()
        .map(|a| {
            let mut r = a.clone();
            for q in qb {
                let p = dot(q, &r);
                axpy(-p, q, &mut r);
            }
            r
        })
        .collect();
    let m = nalgebra::DMatrix::from_fn(d, residuals.len(), |i, j| residuals[j][i]);
    let sv = m.singular_values();
    sv.iter().fold(0.0f64, |acc, v| acc.max(*v)).min(1.0)
}

/// Largest principal angle (radians) between two subspaces given by
/// orthonormal bases; `pi/2` when the dimensions differ.
pub fn principal_angle(qa: &[Vec<f64>], qb: &[Vec<f64>]) -> f64 {
    if qa.len() != qb.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    containment_sine(qa, qb)
        .max(containment_sine(qb, qa))
        .asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let m = [2.0, 1.0, 1.0, 3.0];
        let x = lu_solve(2, &m, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(lu_solve(2, &[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = [4.0, 7.0, 2.0, 6.0];
        let inv = invert(2, &m).unwrap();
        let expect = [0.6, -0.7, -0.2, 0.4];
        for (a, b) in inv.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn completion_is_orthonormal() {
        let q = orthonormal_basis(&[vec![1.0, 1.0, 0.0]], 1e-12);
        let extra = complete_basis(&q, 3, 1e-8);
        assert_eq!(extra.len(), 2);
        let all: Vec<_> = q.iter().chain(&extra).collect();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(all[i], all[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn principal_angles() {
        let a = orthonormal_basis(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 1e-12);
        let b = orthonormal_basis(&[vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]], 1e-12);
        assert!(principal_angle(&a, &b) < 1e-12);
        let c = orthonormal_basis(&[vec![0.0, 0.0, 1.0]], 1e-12);
        assert!((containment_sine(&c, &a) - 1.0).abs() < 1e-12);
        assert!(containment_sine(&a[..1], &a) < 1e-15);
    }

    #[test]
    fn matrix_serde_is_row_major() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[1.0,2.0],[3.0,4.0]]");
        let back: Matrix = serde_json::from_str("[[1.0,2.0],[3.0,4.0]]").unwrap();
        assert_eq!(back, m);
    }
}
