#![allow(dead_code)]

use ewfkit::rng;
use ewfkit::whitening::CovarianceModel;
use ewfkit::{Complex64, ComplexMatrix};

/// Hermitian positive-definite `A·Aᴴ + εI` from a seeded complex Gaussian `A`.
pub fn random_sigma(m: usize, seed: u64) -> ComplexMatrix {
    let a = rng::complex_gaussian_matrix(m, m, rng::derive_seed(seed, 0x5167, m as u64));
    let mut s = (&a * &a.conj_transpose()).symmetrized();
    for i in 0..m {
        s[(i, i)] += Complex64::new(0.1, 0.0);
        s[(i, i)].im = 0.0;
    }
    s
}

pub fn random_cov(m: usize, seed: u64) -> CovarianceModel {
    CovarianceModel::new(&random_sigma(m, seed)).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    rng::complex_gaussian_matrix(rows, cols, rng::derive_seed(seed, 0x6a7, (rows * 100 + cols) as u64))
}

/// Gauss-Jordan inverse with partial pivoting, independent of the crate's
/// factorizations.
pub fn gauss_jordan_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut aug: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.norm() > 0.0, "singular matrix");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = aug[r][col];
                if factor.norm() != 0.0 {
                    let pivot_row = aug[col].clone();
                    for (v, pr) in aug[r].iter_mut().zip(&pivot_row) {
                        *v -= factor * pr;
                    }
                }
            }
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| aug[i][n + j])
}

/// `trace(Aᵏ)` for `k = 1..=kmax`.
pub fn power_traces(a: &ComplexMatrix, kmax: usize) -> Vec<Complex64> {
    let mut p = a.clone();
    let mut out = Vec::with_capacity(kmax);
    for _ in 0..kmax {
        out.push(p.diagonal().iter().sum());
        p = &p * a;
    }
    out
}

/// Direct quadratic form `(y − Hx)ᴴ·Σ⁻¹·(y − Hx)` given `Σ⁻¹`.
pub fn quadratic_form(sigma_inv: &ComplexMatrix, h: &ComplexMatrix, x: &[Complex64], y: &[Complex64]) -> f64 {
    let hx = h.matvec(x).unwrap();
    let e: Vec<Complex64> = y.iter().zip(&hx).map(|(a, b)| a - b).collect();
    let se = sigma_inv.matvec(&e).unwrap();
    e.iter().zip(&se).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}
