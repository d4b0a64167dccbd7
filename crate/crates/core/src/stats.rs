//! Colored complex Gaussian sampling and Monte Carlo whiteness checks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matdecomp::ComplexMatrix;
use crate::whitening::{CovarianceModel, WhiteningFilter};
use crate::{rng, tol};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dim: usize,
    pub seed: u64,
    pub samples: Vec<Vec<Complex64>>,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// The batch as an n×M matrix, one sample per row.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n(), self.dim, |i, j| self.samples[i][j])
    }
}

/// Draws `n` samples `μ + L·z` with `z` standard circularly-symmetric
/// complex Gaussian. Sample `i` uses stream `i` of `seed` (see [`crate::rng`]).
pub fn sample_colored(cov: &CovarianceModel, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::TooFewSamples { n, required: 1 });
    }
    let m = cov.dim();
    let l = cov.cholesky_factor();
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let z = rng::complex_gaussian_vector(seed, i as u64, m);
            let mut v = l.matvec(&z).expect("cholesky factor matches dimension");
            if let Some(mu) = cov.mean() {
                for (vk, mk) in v.iter_mut().zip(mu) {
                    *vk += mk;
                }
            }
            v
        })
        .collect();
    Ok(SampleBatch { dim: m, seed, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    KnownZero,
    Estimate,
}

/// `(1/n)·Σ (vᵢ − m)(vᵢ − m)ᴴ`, with `m` zero or the sample mean.
pub fn sample_covariance(batch: &SampleBatch, mean_mode: MeanMode) -> Result<ComplexMatrix> {
    let n = batch.n();
    let required = match mean_mode {
        MeanMode::KnownZero => 1,
        MeanMode::Estimate => 2,
    };
    if n < required {
        return Err(Error::TooFewSamples { n, required });
    }
    let m = batch.dim;
    let mean = match mean_mode {
        MeanMode::KnownZero => vec![Complex64::new(0.0, 0.0); m],
        MeanMode::Estimate => sample_mean(batch),
    };
    let mut acc = ComplexMatrix::zeros(m, m);
    let mut centered = vec![Complex64::new(0.0, 0.0); m];
    for v in &batch.samples {
        for k in 0..m {
            centered[k] = v[k] - mean[k];
        }
        for i in 0..m {
            for j in i..m {
                acc[(i, j)] += centered[i] * centered[j].conj();
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            acc[(i, j)] = acc[(j, i)].conj();
        }
        acc[(i, i)].im = 0.0;
    }
    Ok(acc.scale_real(1.0 / n as f64))
}

pub fn sample_mean(batch: &SampleBatch) -> Vec<Complex64> {
    let mut mean = vec![Complex64::new(0.0, 0.0); batch.dim];
    for v in &batch.samples {
        for (a, b) in mean.iter_mut().zip(v) {
            *a += b;
        }
    }
    let inv = 1.0 / batch.n().max(1) as f64;
    mean.iter().map(|z| z * inv).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitenessResult {
    pub pass: bool,
    pub max_dev: f64,
    pub threshold: f64,
}

/// Samples `v ~ (μ, Σ)`, filters with `F`, and compares the sample covariance
/// of `F·v` to `c²·I` against the `8c²/√n` bound.
pub fn whiteness_test(f: &WhiteningFilter, cov: &CovarianceModel, n: usize, seed: u64) -> Result<WhitenessResult> {
    let batch = sample_colored(cov, n, seed)?;
    let filtered = SampleBatch {
        dim: f.matrix().rows(),
        seed,
        samples: batch.samples.par_iter().map(|v| f.apply(v)).collect::<Result<_>>()?,
    };
    let mode = if cov.mean().is_some() {
        MeanMode::Estimate
    } else {
        MeanMode::KnownZero
    };
    let c2 = f.scale_c() * f.scale_c();
    let target = ComplexMatrix::identity(filtered.dim).scale_real(c2);
    let max_dev = sample_covariance(&filtered, mode)?.max_abs_diff(&target);
    let threshold = tol::monte_carlo(n) * c2;
    Ok(WhitenessResult {
        pass: max_dev <= threshold,
        max_dev,
        threshold,
    })
}
