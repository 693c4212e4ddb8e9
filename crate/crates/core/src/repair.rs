//! Shrinking repair of indefinite "correlation-like" matrices.
//!
//! The pipeline is: eigendecompose, raise every eigenvalue below `ε` to `ε`,
//! rebuild, then rescale to unit diagonal. Eigenvectors are never touched,
//! so the repaired matrix stays close to the input entrywise whenever the
//! negative eigenvalues are small.

use alloc::vec::Vec;

use crate::eigen::{reconstruct, sym_eigen, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{diff_norms, Matrix, NormReport, SymmetricMatrix, SYMMETRY_TOLERANCE};

/// Default clipping floor.
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Smallest eigenvalue a certified correlation matrix may have.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Slack on `|a_ij| <= 1` for certified correlation matrices.
pub const OFF_DIAGONAL_SLACK: f64 = 1e-12;

/// Symmetric PSD matrix with diagonal entries exactly `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    inner: SymmetricMatrix,
    min_eigenvalue: f64,
}

impl CorrelationMatrix {
    /// Certifies a matrix: exact unit diagonal, off-diagonals within
    /// `[-1, 1]` up to `1e-12`, smallest eigenvalue at least `-1e-10`.
    pub fn new(inner: SymmetricMatrix) -> Result<Self> {
        let spectrum = sym_eigen(&inner)?;
        Self::certify(inner, spectrum.min_value())
    }

    fn certify(inner: SymmetricMatrix, min_eigenvalue: f64) -> Result<Self> {
        let max_diagonal_deviation = inner.diagonal().iter().fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
        let max_abs_off_diagonal = inner.max_abs_off_diagonal();
        if max_diagonal_deviation != 0.0
            || min_eigenvalue < -PSD_TOLERANCE
            || max_abs_off_diagonal > 1.0 + OFF_DIAGONAL_SLACK
        {
            return Err(Error::NotCorrelation {
                min_eigenvalue,
                max_diagonal_deviation,
                max_abs_off_diagonal,
            });
        }
        Ok(CorrelationMatrix { inner, min_eigenvalue })
    }

    pub fn as_symmetric(&self) -> &SymmetricMatrix {
        &self.inner
    }

    pub fn into_symmetric(self) -> SymmetricMatrix {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    /// Smallest eigenvalue found during certification.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Eigenvalue clipping followed by renormalization.
    Clip,
    /// Dykstra-corrected alternating projections.
    Apd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Clip => "clip",
            Method::Apd => "apd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub repaired: CorrelationMatrix,
    /// Clipping floor for `Clip`; convergence tolerance for `Apd`.
    pub epsilon: f64,
    /// Per-eigenvalue corrections, aligned with `input_eigenvalues`.
    pub shifts: Vec<f64>,
    pub clipped_count: usize,
    /// Input spectrum, descending.
    pub input_eigenvalues: Vec<f64>,
    /// Norms of `input - repaired`.
    pub distance: NormReport,
    pub method: Method,
    /// Projection rounds for `Apd`, zero for `Clip`.
    pub iterations: usize,
}

/// Raises every eigenvalue below `epsilon` to `epsilon`.
///
/// Returns the clipped decomposition (same eigenvectors) and the shifts
/// `max(λ, ε) − λ`, which are zero exactly where `λ >= ε`.
pub fn clip_eigenvalues(d: &SpectralDecomposition, epsilon: f64) -> Result<(SpectralDecomposition, Vec<f64>)> {
    check_epsilon(epsilon)?;
    let clipped: Vec<f64> = d.values().iter().map(|&l| l.max(epsilon)).collect();
    let shifts = clipped
        .iter()
        .zip(d.values())
        .map(|(&c, &l)| {
            // rounding can leave l + (c − l) one ulp short of c
            let mut shift = c - l;
            while l + shift < c {
                shift = shift.next_up();
            }
            shift
        })
        .collect();
    // max(·, ε) is monotone, so descending order survives
    Ok((d.with_values(clipped), shifts))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(epsilon))
    }
}

/// Rescales a covariance-like matrix to `a_ij / sqrt(a_ii a_jj)`.
///
/// The diagonal is written as `1.0` directly. Fails when a diagonal entry is
/// not strictly positive, or when the result cannot be certified (the input
/// was not PSD).
pub fn normalize_to_correlation(covariance: &SymmetricMatrix) -> Result<CorrelationMatrix> {
    CorrelationMatrix::new(scale_to_unit_diagonal(covariance)?)
}

pub(crate) fn scale_to_unit_diagonal(covariance: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let diag = covariance.diagonal();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, &d)| d.is_nan() || d <= 0.0) {
        return Err(Error::NonPositiveDiagonal { index, value });
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|d| 1.0 / libm::sqrt(*d)).collect();
    SymmetricMatrix::from_upper_fn(covariance.dim(), |i, j| {
        if i == j {
            1.0
        } else {
            covariance.get(i, j) * inv_sqrt[i] * inv_sqrt[j]
        }
    })
}

/// Clip-and-normalize repair with floor `epsilon`.
///
/// When no eigenvalue lies below `epsilon` the input is normalized directly,
/// so valid correlation matrices come back bitwise unchanged.
pub fn shrink_repair(a: &SymmetricMatrix, epsilon: f64) -> Result<RepairResult> {
    check_epsilon(epsilon)?;
    let spectrum = sym_eigen(a)?;
    let (clipped, shifts) = clip_eigenvalues(&spectrum, epsilon)?;
    let clipped_count = shifts.iter().filter(|s| **s > 0.0).count();

    let covariance = if clipped_count == 0 {
        a.clone()
    } else {
        reconstruct(&clipped)
    };
    debug_assert!(
        clipped_count == 0 || covariance.diagonal().iter().all(|d| *d >= epsilon * (1.0 - 1e-9)),
        "clipped matrix has a diagonal entry below epsilon"
    );
    let repaired = normalize_to_correlation(&covariance)?;
    let distance = diff_norms(a, repaired.as_symmetric())?;

    Ok(RepairResult {
        repaired,
        epsilon,
        shifts,
        clipped_count,
        input_eigenvalues: spectrum.values().to_vec(),
        distance,
        method: Method::Clip,
        iterations: 0,
    })
}

/// Tolerances for [`check_correlation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    /// Allowed `|a_ii − 1|`.
    pub diagonal: f64,
    /// Allowed negativity of the smallest eigenvalue.
    pub psd: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            diagonal: 1e-8,
            psd: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    pub is_symmetric: bool,
    pub max_asymmetry: f64,
    pub unit_diagonal: bool,
    pub max_diagonal_deviation: f64,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    pub is_correlation: bool,
    pub offdiag_in_range: bool,
}

/// Validates a symmetric matrix as a correlation matrix.
pub fn check_correlation(a: &SymmetricMatrix, tol: CheckTolerances) -> Result<CheckReport> {
    report(a, 0.0, true, tol)
}

/// Validates a raw square grid, measuring its asymmetry before the
/// eigenvalue test runs on `(A + Aᵀ)/2`.
pub fn check_correlation_grid(grid: &Matrix, tol: CheckTolerances) -> Result<CheckReport> {
    if grid.dim() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !grid.is_finite() {
        let n = grid.dim();
        let k = grid.as_slice().iter().position(|x| !x.is_finite()).unwrap_or(0);
        return Err(Error::NonFinite { row: k / n, col: k % n });
    }
    let max_asymmetry = grid.max_asymmetry();
    let is_symmetric = max_asymmetry <= SYMMETRY_TOLERANCE * grid.max_abs();
    report(
        &SymmetricMatrix::symmetrized(grid.clone()),
        max_asymmetry,
        is_symmetric,
        tol,
    )
}

fn report(a: &SymmetricMatrix, max_asymmetry: f64, is_symmetric: bool, tol: CheckTolerances) -> Result<CheckReport> {
    let max_diagonal_deviation = a.diagonal().iter().fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
    let min_eigenvalue = sym_eigen(a)?.min_value();
    let unit_diagonal = max_diagonal_deviation <= tol.diagonal;
    let is_psd = min_eigenvalue >= -tol.psd;
    let offdiag_in_range = a.max_abs_off_diagonal() <= 1.0 + OFF_DIAGONAL_SLACK;
    Ok(CheckReport {
        is_symmetric,
        max_asymmetry,
        unit_diagonal,
        max_diagonal_deviation,
        min_eigenvalue,
        is_psd,
        is_correlation: is_symmetric && unit_diagonal && is_psd && offdiag_in_range,
        offdiag_in_range,
    })
}

/// Max-norm residual of `(B∘B)·λ = target`.
///
/// The diagonal of `B·diag(λ)·Bᵀ` is `(B∘B)·λ`, so with a target of all ones
/// this measures how far the decomposed matrix is from a unit diagonal.
pub fn diagonal_consistency(d: &SpectralDecomposition, target_diagonal: &[f64]) -> Result<f64> {
    let n = d.dim();
    if target_diagonal.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: target_diagonal.len(),
        });
    }
    let squared = d.vectors().hadamard_square();
    let mut worst = 0.0f64;
    for (i, target) in target_diagonal.iter().enumerate() {
        let diag: f64 = squared.row(i).iter().zip(d.values()).map(|(b, l)| b * l).sum();
        worst = worst.max((diag - target).abs());
    }
    Ok(worst)
}
