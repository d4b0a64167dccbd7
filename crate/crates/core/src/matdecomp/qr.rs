use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tol;

/// Thin QR factors: `A = Q·R`, `Q` is M×N with orthonormal columns and `R`
/// is N×N upper triangular with a real positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QRFactors {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Householder QR followed by a diagonal phase normalization so that
/// `diag(R)` is real and positive. With full column rank this is the unique
/// such factorization.
pub fn qr_posdiag(a: &ComplexMatrix) -> Result<QRFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let floor = tol::RANK_FLOOR_REL * a.frobenius_norm();
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(n);

    for k in 0..n {
        let sub_norm_sqr: f64 = (k + 1..m).map(|i| work[(i, k)].norm_sqr()).sum();
        if sub_norm_sqr == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = work[(k, k)];
        let norm = (x0.norm_sqr() + sub_norm_sqr).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| work[(i, k)]).collect();
        v[0] -= alpha;
        let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for j in k..n {
            apply_reflector(&v, v_norm_sqr, &mut work, k, j);
        }
        reflectors.push(Some(v));
    }

    for k in 0..n {
        let magnitude = work[(k, k)].norm();
        if magnitude <= floor {
            return Err(Error::RankDeficient { column: k, magnitude });
        }
    }

    let mut q = ComplexMatrix::from_fn(m, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for (k, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            for j in 0..n {
                apply_reflector(v, v_norm_sqr, &mut q, k, j);
            }
        }
    }

    // R ← D·R, Q ← Q·Dᴴ with D[k][k] = conj(R[k][k]) / |R[k][k]|.
    let mut r = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let rkk = work[(k, k)];
        let d = rkk.conj() / rkk.norm();
        r[(k, k)] = Complex64::new(rkk.norm(), 0.0);
        for j in k + 1..n {
            r[(k, j)] = d * work[(k, j)];
        }
        let dc = d.conj();
        for i in 0..m {
            q[(i, k)] *= dc;
        }
    }
    Ok(QRFactors { q, r })
}

/// Applies `I − 2vvᴴ/‖v‖²` to rows `offset..` of column `col`.
fn apply_reflector(v: &[Complex64], v_norm_sqr: f64, m: &mut ComplexMatrix, offset: usize, col: usize) {
    let dot: Complex64 = v
        .iter()
        .enumerate()
        .map(|(i, vi)| vi.conj() * m[(offset + i, col)])
        .sum();
    let s = dot * (2.0 / v_norm_sqr);
    for (i, vi) in v.iter().enumerate() {
        m[(offset + i, col)] -= s * vi;
    }
}
