//! Randomized comparison of clip repair against alternating projections.
//!
//! Each trial draws a random correlation matrix, adds symmetric uniform noise
//! to the off-diagonal (diagonal kept at 1) until the result is indefinite,
//! then repairs it with both methods. Trial `k` is seeded with `seed + k`, so
//! any single trial can be replayed on its own.

use corrfix_core::{
    apd_nearest, diff_norms, shrink_repair, sym_eigen, ApdOptions, Matrix, NormReport, SymmetricMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Draws allowed per trial before giving up on an indefinite perturbation.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub size: usize,
    pub trials: usize,
    pub seed: u64,
    pub noise: f64,
    pub epsilon: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("size must be at least 2 and trials at least 1 (got size {size}, trials {trials})")]
    BadConfig { size: usize, trials: usize },
    #[error("noise must be finite and non-negative, got {0}")]
    BadNoise(f64),
    #[error("trial {trial}: no indefinite perturbation after {MAX_ATTEMPTS} attempts")]
    Generation { trial: usize },
    #[error("trial {trial}: {source}")]
    Repair { trial: usize, source: corrfix_core::Error },
}

impl BenchError {
    /// Numerical failures exit with 3, bad arguments with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::BadConfig { .. } | BenchError::BadNoise(_) => 1,
            BenchError::Generation { .. } | BenchError::Repair { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub clip_vs_perturbed: NormReport,
    pub apd_vs_perturbed: NormReport,
    pub clip_vs_original: NormReport,
    pub apd_vs_original: NormReport,
    pub min_eigenvalue: f64,
    pub apd_iterations: usize,
}

impl TrialResult {
    /// Clip Frobenius distance over apd Frobenius distance; 1 when both vanish.
    pub fn frobenius_ratio(&self) -> f64 {
        ratio(self.clip_vs_perturbed.frobenius, self.apd_vs_perturbed.frobenius)
    }

    pub fn max_ratio(&self) -> f64 {
        ratio(self.clip_vs_perturbed.max, self.apd_vs_perturbed.max)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64>) -> Stat {
        let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0usize);
        for v in values {
            sum += v;
            max = max.max(v);
            count += 1;
        }
        Stat {
            mean: if count == 0 { 0.0 } else { sum / count as f64 },
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub config: BenchConfig,
    pub trials: Vec<TrialResult>,
    pub clip_frobenius_vs_perturbed: Stat,
    pub apd_frobenius_vs_perturbed: Stat,
    pub clip_max_vs_perturbed: Stat,
    pub apd_max_vs_perturbed: Stat,
    pub clip_frobenius_vs_original: Stat,
    pub apd_frobenius_vs_original: Stat,
    pub clip_max_vs_original: Stat,
    pub apd_max_vs_original: Stat,
    /// Mean clip Frobenius distance over mean apd Frobenius distance.
    pub clip_apd_frobenius_ratio: f64,
}

pub fn run_bench(config: BenchConfig) -> Result<BenchSummary, BenchError> {
    if config.size < 2 || config.trials < 1 {
        return Err(BenchError::BadConfig {
            size: config.size,
            trials: config.trials,
        });
    }
    if !config.noise.is_finite() || config.noise < 0.0 {
        return Err(BenchError::BadNoise(config.noise));
    }
    let trials = (0..config.trials)
        .map(|k| run_trial(&config, k))
        .collect::<Result<Vec<_>, _>>()?;

    let stat = |f: fn(&TrialResult) -> f64| Stat::of(trials.iter().map(f));
    let clip_frobenius_vs_perturbed = stat(|t| t.clip_vs_perturbed.frobenius);
    let apd_frobenius_vs_perturbed = stat(|t| t.apd_vs_perturbed.frobenius);
    Ok(BenchSummary {
        config,
        clip_frobenius_vs_perturbed,
        apd_frobenius_vs_perturbed,
        clip_max_vs_perturbed: stat(|t| t.clip_vs_perturbed.max),
        apd_max_vs_perturbed: stat(|t| t.apd_vs_perturbed.max),
        clip_frobenius_vs_original: stat(|t| t.clip_vs_original.frobenius),
        apd_frobenius_vs_original: stat(|t| t.apd_vs_original.frobenius),
        clip_max_vs_original: stat(|t| t.clip_vs_original.max),
        apd_max_vs_original: stat(|t| t.apd_vs_original.max),
        clip_apd_frobenius_ratio: ratio(clip_frobenius_vs_perturbed.mean, apd_frobenius_vs_perturbed.mean),
        trials,
    })
}

fn run_trial(config: &BenchConfig, trial: usize) -> Result<TrialResult, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(trial as u64));
    let wrap = |source| BenchError::Repair { trial, source };

    let (original, perturbed, min_eigenvalue) = (0..MAX_ATTEMPTS)
        .find_map(|_| {
            let original = random_correlation(&mut rng, config.size);
            let perturbed = perturb(&mut rng, &original, config.noise);
            let min = sym_eigen(&perturbed).ok()?.min_value();
            // zero noise cannot produce an indefinite matrix; keep the input as is
            (config.noise == 0.0 || min < 0.0).then_some((original, perturbed, min))
        })
        .ok_or(BenchError::Generation { trial })?;

    let clip = shrink_repair(&perturbed, config.epsilon).map_err(wrap)?;
    let apd = apd_nearest(&perturbed, ApdOptions::default()).map_err(wrap)?;
    let dist = |a: &SymmetricMatrix, b: &SymmetricMatrix| diff_norms(a, b).expect("same dimension");
    Ok(TrialResult {
        clip_vs_perturbed: clip.distance,
        apd_vs_perturbed: apd.distance,
        clip_vs_original: dist(clip.repaired.as_symmetric(), &original),
        apd_vs_original: dist(apd.repaired.as_symmetric(), &original),
        min_eigenvalue,
        apd_iterations: apd.iterations,
    })
}

/// Haar-ish orthogonal matrix: Gram-Schmidt on standard normal columns.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // twice is enough
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Matrix::from_fn(n, |i, j| cols[j][i])
}

/// Random correlation matrix: `B·D·Bᵀ` rescaled to unit diagonal, with `B`
/// orthogonal and `D` positive with a spread spectrum.
pub fn random_correlation(rng: &mut impl Rng, n: usize) -> SymmetricMatrix {
    let b = random_orthogonal(rng, n);
    let d: Vec<f64> = (0..n).map(|_| 0.01 + rng.gen::<f64>().powi(2)).collect();
    let cov = SymmetricMatrix::from_upper_fn(n, |i, j| (0..n).map(|k| b[(i, k)] * d[k] * b[(j, k)]).sum())
        .expect("finite entries");
    let inv: Vec<f64> = cov.diagonal().iter().map(|x| 1.0 / x.sqrt()).collect();
    SymmetricMatrix::from_upper_fn(n, |i, j| if i == j { 1.0 } else { cov.get(i, j) * inv[i] * inv[j] })
        .expect("finite entries")
}

/// Adds `U(-noise, noise)` to each off-diagonal pair; the diagonal stays 1.
pub fn perturb(rng: &mut impl Rng, c: &SymmetricMatrix, noise: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_upper_fn(c.dim(), |i, j| {
        if i == j {
            1.0
        } else if noise == 0.0 {
            c.get(i, j)
        } else {
            c.get(i, j) + rng.gen_range(-noise..noise)
        }
    })
    .expect("finite entries")
}
