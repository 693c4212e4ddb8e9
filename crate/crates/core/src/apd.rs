//! Alternating projections with Dykstra's correction.
//!
//! Baseline used to compare clip repair against the Frobenius-nearest
//! correlation matrix. Projects alternately onto the PSD cone (eigenvalues
//! clipped at zero) and the unit-diagonal affine set, carrying Dykstra's
//! correction on the PSD step so the iterates converge to the nearest point
//! of the intersection rather than just some point of it.

use alloc::vec::Vec;

use crate::eigen::{reconstruct, sym_eigen};
use crate::error::{Error, Result};
use crate::matrix::{diff_norms, Matrix, SymmetricMatrix};
use crate::repair::{scale_to_unit_diagonal, CorrelationMatrix, Method, RepairResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApdOptions {
    pub max_iter: usize,
    /// Stop once successive iterates differ by at most this in Frobenius norm.
    pub tol: f64,
}

impl Default for ApdOptions {
    fn default() -> Self {
        ApdOptions {
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

/// Nearest correlation matrix in Frobenius norm, to within `opts.tol`.
///
/// The returned matrix is the last PSD iterate rescaled to unit diagonal,
/// which keeps it PSD (congruence) with an exact unit diagonal.
pub fn apd_nearest(a: &SymmetricMatrix, opts: ApdOptions) -> Result<RepairResult> {
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(Error::NonPositiveEpsilon(opts.tol));
    }
    let n = a.dim();
    let input_spectrum = sym_eigen(a)?;
    if input_spectrum.min_value() >= 0.0 && a.diagonal().iter().all(|d| *d == 1.0) {
        // already in the intersection, hence its own nearest point
        let repaired = CorrelationMatrix::new(a.clone())?;
        return Ok(RepairResult {
            repaired,
            epsilon: opts.tol,
            shifts: alloc::vec![0.0; n],
            clipped_count: 0,
            input_eigenvalues: input_spectrum.values().to_vec(),
            distance: diff_norms(a, a)?,
            method: Method::Apd,
            iterations: 0,
        });
    }

    let mut y = a.as_matrix().clone();
    let mut correction = Matrix::zeros(n);
    let mut psd_iterate = a.clone();
    let mut change = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let residual = SymmetricMatrix::from_matrix(subtract(&y, &correction))?;
        let spectrum = sym_eigen(&residual)?;
        let values: Vec<f64> = spectrum.values().iter().map(|l| l.max(0.0)).collect();
        psd_iterate = reconstruct(&spectrum.with_values(values));
        correction = subtract(psd_iterate.as_matrix(), residual.as_matrix());

        let mut next = psd_iterate.as_matrix().clone();
        for i in 0..n {
            next[(i, i)] = 1.0;
        }
        change = subtract(&next, &y).frobenius();
        y = next;
        if change <= opts.tol {
            break;
        }
    }
    if change > opts.tol {
        return Err(Error::ApdNotConverged {
            iterations,
            residual: change,
            last_iterate: y.into_vec(),
        });
    }

    let repaired = CorrelationMatrix::new(scale_to_unit_diagonal(&psd_iterate)?)?;
    let output_spectrum = sym_eigen(repaired.as_symmetric())?;
    let shifts: Vec<f64> = output_spectrum
        .values()
        .iter()
        .zip(input_spectrum.values())
        .map(|(out, inp)| out - inp)
        .collect();
    let clipped_count = shifts.iter().filter(|s| **s > 0.0).count();
    let distance = diff_norms(a, repaired.as_symmetric())?;

    Ok(RepairResult {
        repaired,
        epsilon: opts.tol,
        shifts,
        clipped_count,
        input_eigenvalues: input_spectrum.values().to_vec(),
        distance,
        method: Method::Apd,
        iterations,
    })
}

fn subtract(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.dim(), |i, j| a[(i, j)] - b[(i, j)])
}
