//! Square complex matrices, stored dense and row-major.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use super::QcoreError;

/// A square matrix of complex numbers.
///
/// The dimension is fixed at construction. Entries are plain `Complex64`;
/// no sparsity, no blocking — the intended scale is a few dozen rows.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows, which must form a square array.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, QcoreError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(QcoreError::Empty);
        }
        for row in rows {
            if row.len() != dim {
                return Err(QcoreError::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Builds a matrix with real entries from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, QcoreError> {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    /// Rank-1 outer product `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.at(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `||H - H†||_F`, zero for exactly Hermitian matrices.
    pub fn hermiticity_error(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = self.at(i, j) - self.at(j, i).conj();
                sum += d.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// `(H + H†) / 2` — the Hermitian part.
    pub fn hermitized(&self) -> Self {
        Self::from_fn(self.dim, |i, j| {
            (self.at(i, j) + self.at(j, i).conj()) * 0.5
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Matrix-vector product. Panics on dimension mismatch: callers that take
    /// external input validate dimensions before reaching this layer.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.at(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.at(i, j)).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix addition dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix subtraction dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let dim = self.dim;
        CMatrix::from_fn(dim, |i, j| {
            (0..dim).map(|k| self.at(i, k) * rhs.at(k, j)).sum()
        })
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self.at(i, j);
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
