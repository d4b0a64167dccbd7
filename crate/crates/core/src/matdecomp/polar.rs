use num_complex::Complex64;

use super::{eig_hermitian, vector_norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tol;

/// `S = Q·P` with `Q` unitary and `P` Hermitian positive semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFactors {
    pub q: ComplexMatrix,
    pub p: ComplexMatrix,
}

/// Polar decomposition of a square matrix.
///
/// With `SᴴS = V·diag(σ²)·Vᴴ`, `P = V·diag(σ)·Vᴴ` and `Q = U·Vᴴ` where
/// `u_i = S·v_i / σ_i`. Columns of `U` belonging to (numerically) zero
/// singular values are completed to an orthonormal basis, so singular `S`
/// still yields a unitary `Q`.
pub fn polar(s: &ComplexMatrix) -> Result<PolarFactors> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let gram = (&s.conj_transpose() * s).symmetrized();
    let eig = eig_hermitian(&gram)?;
    let sigma: Vec<f64> = eig.lambda.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &eig.q;

    let p = {
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * sigma[j]);
        (&scaled * &v.conj_transpose()).symmetrized()
    };

    let cutoff = tol::FULL_RANK_REL * sigma.first().copied().unwrap_or(0.0);
    let sv = s * v;
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut basis = 0;
    for (j, &sj) in sigma.iter().enumerate() {
        let mut cand: Vec<Complex64> = if sj > cutoff && sj > 0.0 {
            sv.column(j).iter().map(|z| z / sj).collect()
        } else {
            // Complete with standard basis vectors.
            loop {
                if basis == n {
                    return Err(Error::InternalInvariantViolation(
                        "failed to complete polar factor to a unitary basis".into(),
                    ));
                }
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[basis] = Complex64::new(1.0, 0.0);
                basis += 1;
                orthogonalize(&mut e, &u_cols);
                if vector_norm(&e) > 0.5 {
                    break e;
                }
            }
        };
        // Columns are visited by descending σ, so roundoff in u_j (which grows
        // like σmax/σj) is projected out without disturbing larger columns.
        orthogonalize(&mut cand, &u_cols);
        let norm = vector_norm(&cand);
        u_cols.push(cand.iter().map(|z| z / norm).collect());
    }
    let u = ComplexMatrix::from_fn(n, n, |i, j| u_cols[j][i]);
    let q = &u * &v.conj_transpose();
    Ok(PolarFactors { q, p })
}

/// Two passes of Gram-Schmidt against `basis`.
fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for u in basis {
            let proj: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (c, a) in v.iter_mut().zip(u) {
                *c -= proj * a;
            }
        }
    }
}
