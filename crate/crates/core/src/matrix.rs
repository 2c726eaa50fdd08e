//! Dense row-major matrices.
//!
//! Storage is a plain `Vec<f64>` so that reservoir folds stay cheap and
//! serialisation is a list of rows. Heavy kernels (products, Cholesky,
//! eigenvalues) go through `faer` views over the same buffer.

use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

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
            m[(i, i)] = 1.0;
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equally long rows. An empty list yields a `0 x cols` matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, and a 0-column matrix still has rows
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.iter_rows()) {
            *o = dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub fn from_faer(m: MatRef<'_, f64>) -> Matrix {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimensions");
        let mut out = Mat::<f64>::zeros(self.rows, rhs.cols);
        faer::linalg::matmul::matmul(
            out.as_mut(),
            Accum::Replace,
            self.as_faer(),
            rhs.as_faer(),
            1.0,
            par(),
        );
        Matrix::from_faer(out.as_ref())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "spectral radius of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self.rows == 0 {
            return Ok(0.0);
        }
        let owned = self.as_faer().to_owned();
        let eig = owned
            .eigenvalues()
            .map_err(|e| Error::Numerical(format!("eigenvalue solver: {e:?}")))?;
        Ok(eig.iter().fold(0.0, |m, z| m.max(z.norm())))
    }

    /// Eigenvalues in nondecreasing order with eigenvectors as columns, for a
    /// symmetric matrix.
    pub fn symmetric_eigen(&self) -> Result<(Vec<f64>, Matrix)> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("eigendecomposition of a non-square matrix".into()));
        }
        let evd = self
            .as_faer()
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Numerical(format!("symmetric eigensolver: {e:?}")))?;
        let s = evd.S().column_vector();
        let values = (0..self.rows).map(|i| s[i]).collect();
        Ok((values, Matrix::from_faer(evd.U())))
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor series.
    pub fn expm(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("expm of a non-square matrix".into()));
        }
        let n = self.rows;
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut squarings = 0u32;
        let mut s = 1.0;
        while norm1 * s > 0.5 {
            s *= 0.5;
            squarings += 1;
        }
        let mut a = self.clone();
        a.scale(s);
        // 0.5^k / k! is below 1e-30 well before 24 terms
        let mut term = Matrix::identity(n);
        let mut acc = Matrix::identity(n);
        for k in 1..=24 {
            term = term.matmul(&a);
            term.scale(1.0 / k as f64);
            acc.data
                .iter_mut()
                .zip(&term.data)
                .for_each(|(x, t)| *x += t);
        }
        for _ in 0..squarings {
            acc = acc.matmul(&acc);
        }
        Ok(acc)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in self.iter_rows() {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        Matrix::from_rows(&rows, cols).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorises
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Parallelism handed to faer kernels.
pub(crate) fn par() -> Par {
    #[cfg(feature = "parallel")]
    {
        Par::rayon(0)
    }
    #[cfg(not(feature = "parallel"))]
    {
        Par::Seq
    }
}

/// Solves `a * x = b` for symmetric positive definite `a` via Cholesky.
pub(crate) fn solve_spd(a: Mat<f64>, b: Mat<f64>) -> Result<Mat<f64>> {
    let llt = a
        .llt(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Cholesky factorisation failed: {e:?}")))?;
    Ok(llt.solve(b))
}
