use num_complex::Complex64;

use super::{hermitian_part, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tol;

/// `Σ = L·Lᴴ` with `L` lower triangular and a real positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactors {
    pub l: ComplexMatrix,
}

/// Right-looking Cholesky factorization of a Hermitian positive-definite matrix.
///
/// Fails with `NotPositiveDefinite` when a pivot drops to
/// `PIVOT_FLOOR_REL · max diag(Σ)` or below.
pub fn cholesky(sigma: &ComplexMatrix) -> Result<CholeskyFactors> {
    let mut a = hermitian_part(sigma)?;
    let n = a.rows();
    let max_diag = (0..n).map(|i| a[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    let floor = tol::PIVOT_FLOOR_REL * max_diag.max(0.0);

    for k in 0..n {
        let pivot = a[(k, k)].re;
        if pivot.is_nan() || pivot <= floor {
            return Err(Error::NotPositiveDefinite { index: k, pivot });
        }
        let d = pivot.sqrt();
        a[(k, k)] = Complex64::new(d, 0.0);
        for i in k + 1..n {
            a[(i, k)] /= d;
        }
        // Trailing update of the lower triangle: A[i][j] -= l_ik · conj(l_jk).
        for j in k + 1..n {
            let ljk = a[(j, k)].conj();
            for i in j..n {
                let lik = a[(i, k)];
                a[(i, j)] -= lik * ljk;
            }
            a[(j, j)].im = 0.0;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(CholeskyFactors { l: a })
}
