//! Dense square matrices and the norms used to measure repair distance.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative asymmetry (against the largest absolute entry) that ingestion
/// silently averages away.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::BadShape { n, len: data.len() });
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Dense product `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise square, `M∘M`.
    pub fn hadamard_square(&self) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * x).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest `|m[i][j] - m[j][i]|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Entrywise square of a square matrix.
pub fn hadamard_square(m: &Matrix) -> Matrix {
    m.hadamard_square()
}

/// Real symmetric matrix with finite entries and `a[i][j] == a[j][i]` bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(SymmetricMatrix(Matrix::identity(n)))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(SymmetricMatrix(Matrix::zeros(n)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_upper_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds from the upper triangle (`i <= j`), mirroring below the diagonal.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Accepts a row-major grid whose asymmetry is at most
    /// `SYMMETRY_TOLERANCE * max|a|`, storing `(A + Aᵀ)/2`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_matrix(Matrix::from_row_major(n, data)?)
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        let n = m.dim();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for i in 0..n {
            for j in 0..n {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let tolerance = SYMMETRY_TOLERANCE * m.max_abs();
        for i in 0..n {
            for j in (i + 1)..n {
                let deviation = (m[(i, j)] - m[(j, i)]).abs();
                if deviation > tolerance {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        deviation,
                        tolerance,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + Mᵀ)/2` without any tolerance check. Entries must be finite.
    pub(crate) fn symmetrized(mut m: Matrix) -> Self {
        let n = m.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        SymmetricMatrix(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.frobenius()
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(self.get(i, j).abs());
            }
        }
        worst
    }

    /// Sets a symmetric pair of entries.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        self.0[(i, j)] = value;
        self.0[(j, i)] = value;
        Ok(())
    }
}

/// Frobenius, max and size-scaled max norms of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub frobenius: f64,
    pub max: f64,
    /// `n * max`; submultiplicative where `max` alone is not.
    pub scaled_max: f64,
}

impl NormReport {
    pub fn of_matrix(m: &Matrix) -> Self {
        let max = m.max_abs();
        NormReport {
            frobenius: m.frobenius(),
            max,
            scaled_max: m.dim() as f64 * max,
        }
    }
}

pub fn norms_of(a: &SymmetricMatrix) -> NormReport {
    NormReport::of_matrix(a.as_matrix())
}

/// Norms of `a - b`.
pub fn diff_norms(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<NormReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
    Ok(NormReport::of_matrix(&Matrix::from_row_major(a.dim(), diff)?))
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Scaled sum of squares, robust against overflow for large entries.
fn frobenius(xs: &[f64]) -> f64 {
    let scale = max_abs(xs);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = xs.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(sum)
}
