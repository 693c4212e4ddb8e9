//! Repair of indefinite symmetric matrices into valid correlation matrices.
//!
//! The crate is `no_std` (it needs `alloc`). It provides a cyclic Jacobi
//! eigensolver, the clip-and-normalize repair, a correlation-matrix validator,
//! an alternating-projections baseline for comparison, and Pearson sample
//! correlation over time-series panels with per-pair windows.
//!
//! ```
//! use corrfix_core::{shrink_repair, SymmetricMatrix};
//!
//! let a = SymmetricMatrix::from_row_major(2, vec![1.0, 1.1, 1.1, 1.0]).unwrap();
//! let r = shrink_repair(&a, 1e-3).unwrap();
//! assert_eq!(r.repaired.get(0, 0), 1.0);
//! assert!(r.repaired.min_eigenvalue() > 0.0);
//! ```
#![no_std]

extern crate alloc;

pub mod apd;
pub mod correlation;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod repair;

pub use apd::{apd_nearest, ApdOptions};
pub use correlation::{pearson, sample_correlation, MissingPolicy, PairOverride, TimeSeriesPanel};
pub use eigen::{reconstruct, sym_eigen, SpectralDecomposition};
pub use error::{Error, Result};
pub use matrix::{diff_norms, hadamard_square, norms_of, Matrix, NormReport, SymmetricMatrix};
pub use repair::{
    check_correlation, check_correlation_grid, clip_eigenvalues, diagonal_consistency, normalize_to_correlation,
    shrink_repair, CheckReport, CheckTolerances, CorrelationMatrix, Method, RepairResult, DEFAULT_EPSILON,
};
