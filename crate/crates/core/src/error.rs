use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix of dimension zero was requested.
    EmptyMatrix,
    /// Entry count does not match `n * n`.
    BadShape {
        n: usize,
        len: usize,
    },
    /// A NaN or infinite entry at (row, col).
    NonFinite {
        row: usize,
        col: usize,
    },
    /// Asymmetry beyond the ingestion tolerance.
    Asymmetric {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Jacobi sweeps exhausted before the off-diagonal mass vanished.
    EigenNotConverged {
        sweeps: usize,
        off_diagonal: f64,
    },
    /// Alternating projections ran out of iterations.
    ApdNotConverged {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },
    /// Eigenvalues handed to a decomposition were not sorted non-increasing.
    UnsortedEigenvalues,
    /// A matrix failed the correlation-matrix certification.
    NotCorrelation {
        min_eigenvalue: f64,
        max_diagonal_deviation: f64,
        max_abs_off_diagonal: f64,
    },
    NonPositiveEpsilon(f64),
    NonPositiveDiagonal {
        index: usize,
        value: f64,
    },
    /// Correlation of a constant series.
    DegenerateSeries {
        instrument: String,
    },
    TooFewObservations {
        a: String,
        b: String,
        found: usize,
    },
    LengthMismatch {
        left: usize,
        right: usize,
    },
    MissingData {
        instrument: String,
        date: String,
    },
    UnknownInstrument(String),
    InvalidOverride(String),
    InvalidPanel(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyMatrix => write!(f, "matrix dimension must be at least 1"),
            Error::BadShape { n, len } => {
                write!(f, "expected {} entries for a {n}x{n} matrix, found {len}", n * n)
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite entry at row {}, column {}", row + 1, col + 1)
            }
            Error::Asymmetric { row, col, deviation, tolerance } => write!(
                f,
                "matrix is not symmetric: |a[{r}][{c}] - a[{c}][{r}]| = {deviation:e} exceeds {tolerance:e}",
                r = row + 1,
                c = col + 1
            ),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EigenNotConverged { sweeps, off_diagonal } => write!(
                f,
                "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})"
            ),
            Error::ApdNotConverged { iterations, residual, .. } => write!(
                f,
                "alternating projections did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::UnsortedEigenvalues => write!(f, "eigenvalues must be sorted non-increasing"),
            Error::NotCorrelation { min_eigenvalue, max_diagonal_deviation, max_abs_off_diagonal } => write!(
                f,
                "not a correlation matrix (min eigenvalue {min_eigenvalue:e}, diagonal deviation {max_diagonal_deviation:e}, largest off-diagonal {max_abs_off_diagonal})"
            ),
            Error::NonPositiveEpsilon(e) => write!(f, "epsilon must be positive, got {e}"),
            Error::NonPositiveDiagonal { index, value } => write!(
                f,
                "diagonal entry {} is {value}, not positive; input is not a covariance matrix",
                index + 1
            ),
            Error::DegenerateSeries { instrument } => {
                write!(f, "series for '{instrument}' is constant over the correlation window")
            }
            Error::TooFewObservations { a, b, found } => write!(
                f,
                "pair ('{a}', '{b}') has {found} common observations, at least 3 required"
            ),
            Error::LengthMismatch { left, right } => {
                write!(f, "series lengths differ: {left} vs {right}")
            }
            Error::MissingData { instrument, date } => {
                write!(f, "missing observation for '{instrument}' on {date}")
            }
            Error::UnknownInstrument(name) => write!(f, "unknown instrument '{name}'"),
            Error::InvalidOverride(msg) => write!(f, "invalid pair override: {msg}"),
            Error::InvalidPanel(msg) => write!(f, "invalid panel: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
