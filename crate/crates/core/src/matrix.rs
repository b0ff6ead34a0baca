//! Row-major matrix containers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// An `n × p` matrix of observations; row `t` is the vector observed at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl SeriesMatrix {
    /// Wraps row-major `data`. Requires `n >= 2`, `p >= 1` and finite entries.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientSample { needed: 2, got: n });
        }
        if p == 0 {
            return Err(invalid("dimension p must be at least 1"));
        }
        if data.len() != n * p {
            return Err(invalid(alloc::format!(
                "expected {} entries for a {n}x{p} matrix, got {}",
                n * p,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!(
                "non-finite entry at row {}, column {}",
                i / p + 1,
                i % p + 1
            )));
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(invalid(alloc::format!(
                    "row {} has {} entries, expected {p}",
                    t + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), p, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.p..(t + 1) * self.p]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` to every row in place, re-checking finiteness afterwards.
    pub fn map_rows(mut self, mut f: impl FnMut(usize, &mut [f64])) -> Result<Self> {
        for (t, row) in self.data.chunks_exact_mut(self.p).enumerate() {
            f(t, row);
        }
        Self::new(self.n, self.p, self.data)
    }
}

/// An `n × p` matrix of spatial signs. Every row is unit-norm or exactly zero.
///
/// Only [`crate::sign::sign_transform`] builds one, which keeps the row
/// invariant out of callers' hands.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMatrix {
    pub(crate) data: Vec<f64>,
    pub(crate) n: usize,
    pub(crate) p: usize,
}

impl SignMatrix {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.p..(t + 1) * self.p]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Small dense row-major matrix used for covariances and coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
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

    pub fn identity(p: usize) -> Self {
        let mut m = Self::zeros(p, p);
        for i in 0..p {
            m.data[i * p + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid("matrix data length does not match its shape"));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `out = self · x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Lower-triangular `L` with `self = L Lᵀ`.
    pub fn cholesky(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(invalid("cholesky needs a square matrix"));
        }
        let p = self.rows;
        let mut l = Self::zeros(p, p);
        for j in 0..p {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = libm::sqrt(d);
            l.set(j, j, djj);
            for i in j + 1..p {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(l)
    }

    /// Upper estimate of the spectral radius via `‖A^k‖_F^{1/k}` with
    /// `k = 2^squarings`, renormalising after every squaring.
    ///
    /// Gelfand's formula makes this converge from above; with `k = 1024`
    /// the overshoot is at most a factor `p^{1/1024}`.
    pub fn spectral_radius_estimate(&self, squarings: u32) -> f64 {
        assert_eq!(self.rows, self.cols, "spectral radius needs a square matrix");
        let mut b = self.clone();
        let mut log_scale = 0.0;
        let mut k = 1.0;
        for _ in 0..squarings {
            let norm = b.frobenius_norm();
            if norm == 0.0 {
                return 0.0;
            }
            b = b.scale(1.0 / norm);
            // log‖A^{2k}‖ = 2·(log-scale accumulated for A^k) + log‖B²‖
            log_scale = 2.0 * (log_scale + libm::log(norm));
            b = b.matmul(&b);
            k *= 2.0;
        }
        let norm = b.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        libm::exp((log_scale + libm::log(norm)) / k)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_rejects_bad_shapes() {
        assert!(matches!(
            SeriesMatrix::new(1, 2, vec![1.0, 2.0]),
            Err(Error::InsufficientSample { .. })
        ));
        assert!(SeriesMatrix::new(2, 0, vec![]).is_err());
        assert!(SeriesMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(SeriesMatrix::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(SeriesMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn cholesky_round_trip() {
        let a = Matrix::from_row_major(3, 3, vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]).unwrap();
        let l = a.cholesky().unwrap();
        let back = l.matmul(&l.transpose());
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let bad = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(bad.cholesky(), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        let d = Matrix::from_row_major(2, 2, vec![0.5, 0.0, 0.0, -0.9]).unwrap();
        assert!((d.spectral_radius_estimate(10) - 0.9).abs() < 1e-3);
        // Rotation by 90° scaled by 0.7 has complex eigenvalues ±0.7i.
        let r = Matrix::from_row_major(2, 2, vec![0.0, -0.7, 0.7, 0.0]).unwrap();
        assert!((r.spectral_radius_estimate(10) - 0.7).abs() < 1e-3);
        // Nilpotent.
        let n = Matrix::from_row_major(2, 2, vec![0.0, 5.0, 0.0, 0.0]).unwrap();
        assert_eq!(n.spectral_radius_estimate(10), 0.0);
    }
}
