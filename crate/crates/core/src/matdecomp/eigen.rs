use num_complex::Complex64;

use super::{hermitian_part, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tol;

/// `Σ = Q·diag(λ)·Qᴴ` with `λ` sorted descending.
///
/// Each column of `q` is phase-normalized so that its largest-magnitude
/// component is real and positive, which makes the factors deterministic
/// up to eigenvalue multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFactors {
    pub q: ComplexMatrix,
    pub lambda: Vec<f64>,
}

impl EigenFactors {
    /// Rebuilds `Q·diag(λ)·Qᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let scaled = ComplexMatrix::from_fn(self.q.rows(), self.q.cols(), |i, j| self.q[(i, j)] * self.lambda[j]);
        &scaled * &self.q.conj_transpose()
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm is at most
/// `JACOBI_OFF_REL·‖Σ‖F`; gives up with `NoConvergence` after
/// `JACOBI_MAX_SWEEPS` sweeps.
pub fn eig_hermitian(sigma: &ComplexMatrix) -> Result<EigenFactors> {
    let mut a = hermitian_part(sigma)?;
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let target = tol::JACOBI_OFF_REL * a.frobenius_norm();

    let mut converged = off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == tol::JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let lambda = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut q = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for j in 0..n {
        normalize_phase(&mut q, j);
    }
    Ok(EigenFactors { q, lambda })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Annihilates `a[p][q]` with the unitary `J = diag(1, ē)·[[c, s], [−s, c]]`
/// acting on coordinates `p, q`, where `e` is the phase of `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let e = g / mag;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ec = e.conj();
    let n = a.rows();

    // A ← A·J, V ← V·J
    for m in [&mut *a, &mut *v] {
        for k in 0..n {
            let kp = m[(k, p)];
            let kq = m[(k, q)];
            m[(k, p)] = kp * c - kq * ec * s;
            m[(k, q)] = kp * s + kq * ec * c;
        }
    }
    // A ← Jᴴ·A
    for k in 0..n {
        let pk = a[(p, k)];
        let qk = a[(q, k)];
        a[(p, k)] = pk * c - qk * e * s;
        a[(q, k)] = pk * s + qk * e * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

fn normalize_phase(q: &mut ComplexMatrix, col: usize) {
    let n = q.rows();
    let mut best = 0;
    for i in 1..n {
        if q[(i, col)].norm() > q[(best, col)].norm() {
            best = i;
        }
    }
    let pivot = q[(best, col)];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let phase = pivot.conj() / mag;
    for i in 0..n {
        q[(i, col)] *= phase;
    }
    q[(best, col)] = Complex64::new(q[(best, col)].norm(), 0.0);
}
