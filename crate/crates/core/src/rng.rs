//! Seeded random generation.
//!
//! Seed → stream mapping (stable across releases):
//!
//! * A stream `(seed, index)` is `ChaCha8Rng::seed_from_u64(seed)` with
//!   `set_stream(index)`.
//! * A standard circularly-symmetric complex Gaussian is drawn as two
//!   consecutive `StandardNormal` values `(a, b)` and returned as
//!   `(a + ib)/√2`, so `E[|z|²] = 1`.
//! * Matrices are filled row-major from stream 0 of their seed; vector
//!   batches use one stream per vector index.
//! * Independent sub-seeds come from [`derive_seed`], a SplitMix64 mix.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matdecomp::{qr_posdiag, ComplexMatrix};

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector(seed: u64, index: u64, len: usize) -> Vec<Complex64> {
    let mut rng = stream(seed, index);
    (0..len).map(|_| complex_gaussian(&mut rng)).collect()
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn complex_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = stream(seed, 0);
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng))
}

/// Haar-distributed unitary matrix: the positive-diagonal QR factor of a
/// complex Gaussian matrix. Resamples (with a derived seed) in the
/// probability-zero event of a rank-deficient draw.
pub fn random_orthonormal(dim: usize, seed: u64) -> ComplexMatrix {
    let mut attempt = 0;
    loop {
        let g = complex_gaussian_matrix(dim, dim, derive_seed(seed, 0x0a7e, attempt));
        if let Ok(f) = qr_posdiag(&g) {
            return f.q;
        }
        attempt += 1;
    }
}

/// Random Hermitian positive-definite matrix `U·diag(λ)·Uᴴ` with
/// eigenvalues log-spaced on `[1, condition_number]` and `U` from
/// [`random_orthonormal`].
pub fn random_spd(dim: usize, condition_number: f64, seed: u64) -> Result<ComplexMatrix> {
    if !condition_number.is_finite() || condition_number < 1.0 {
        return Err(crate::Error::InvalidConfig(format!(
            "condition number must be finite and >= 1, got {condition_number}"
        )));
    }
    let lambda: Vec<f64> = (0..dim)
        .map(|i| {
            if dim == 1 {
                1.0
            } else {
                condition_number.powf(i as f64 / (dim - 1) as f64)
            }
        })
        .collect();
    let u = random_orthonormal(dim, seed);
    let scaled = ComplexMatrix::from_fn(dim, dim, |i, j| u[(i, j)] * lambda[j]);
    let mut sigma = (&scaled * &u.conj_transpose()).symmetrized();
    for i in 0..dim {
        sigma[(i, i)].im = 0.0;
    }
    Ok(sigma)
}

/// SplitMix64-style mix of a master seed, a domain tag and an index.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ tag) ^ index)
}
