//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Jacobi is slower than tridiagonalization + QR by a constant factor but the
//! accumulated rotations give an eigenvector matrix that is orthogonal to
//! working precision, which the repair pipeline relies on when it rebuilds
//! the matrix from clipped eigenvalues.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Sweep cap for [`sym_eigen`].
pub const MAX_SWEEPS: usize = 100;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to `‖A‖_F`.
pub const RELATIVE_OFF_DIAGONAL_TOL: f64 = 1e-14;
/// Components at or below this magnitude are skipped when fixing eigenvector signs.
const SIGN_THRESHOLD: f64 = 1e-12;

/// `A = B·diag(λ)·Bᵀ` with `B` orthogonal and `λ` sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    vectors: Matrix,
    values: Vec<f64>,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from an orthogonal matrix (eigenvectors in
    /// columns) and its eigenvalues.
    pub fn from_parts(vectors: Matrix, values: Vec<f64>) -> Result<Self> {
        let n = vectors.dim();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i });
        }
        if !vectors.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::UnsortedEigenvalues);
        }
        Ok(SpectralDecomposition { vectors, values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        // sorted descending
        self.values[self.values.len() - 1]
    }

    /// Same eigenvectors, new eigenvalues. Caller keeps the ordering.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        SpectralDecomposition {
            vectors: self.vectors.clone(),
            values,
        }
    }

    /// `‖BᵀB − I‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim();
        let b = &self.vectors;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n).map(|k| b[(k, i)] * b[(k, j)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Runs cyclic sweeps over all `(p, q)` pairs until the off-diagonal Frobenius
/// norm drops to `1e-14·‖A‖_F` or [`MAX_SWEEPS`] sweeps have run. Eigenvalues
/// come back sorted descending; each eigenvector has its first component of
/// magnitude above `1e-12` positive. Equal eigenvalues are ordered by their
/// sign-fixed eigenvectors, lexicographically descending.
pub fn sym_eigen(a: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let tol = RELATIVE_OFF_DIAGONAL_TOL * a.frobenius();

    let mut off = off_diagonal_norm(&m);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    Ok(sorted_decomposition(v, values))
}

/// Annihilates `m[p][q]` with a plane rotation and accumulates it into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = m.dim();
    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
    // smaller root of t² + 2θt − 1 = 0
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    m[(p, p)] -= t * apq;
    m[(q, q)] += t * apq;
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[(r, p)];
        let arq = m[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        m[(r, p)] = new_rp;
        m[(p, r)] = new_rp;
        m[(r, q)] = new_rq;
        m[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += m[(i, j)] * m[(i, j)];
        }
    }
    libm::sqrt(2.0 * sum)
}

/// Applies the sign convention and the descending ordering.
fn sorted_decomposition(v: Matrix, values: Vec<f64>) -> SpectralDecomposition {
    let n = values.len();
    let mut columns: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = (0..n).map(|i| v[(i, j)]).collect();
            if let Some(&lead) = col.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
                if lead < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match values[b].total_cmp(&values[a]) {
        Ordering::Equal => lexicographic(&columns[b], &columns[a]),
        other => other,
    });

    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let sorted_columns: Vec<Vec<f64>> = order.iter().map(|&k| core::mem::take(&mut columns[k])).collect();
    let vectors = Matrix::from_fn(n, |i, j| sorted_columns[j][i]);
    SpectralDecomposition {
        vectors,
        values: sorted_values,
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// `B·diag(λ)·Bᵀ`, symmetric by construction (upper triangle mirrored).
pub fn reconstruct(d: &SpectralDecomposition) -> SymmetricMatrix {
    let n = d.dim();
    let b = d.vectors();
    let lambda = d.values();
    let mut out = Matrix::zeros(n);
    let mut weighted = alloc::vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            weighted[k] = b[(i, k)] * lambda[k];
        }
        for j in i..n {
            let s: f64 = (0..n).map(|k| weighted[k] * b[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    SymmetricMatrix::symmetrized(out)
}
