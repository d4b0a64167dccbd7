//! Dense complex matrices and the four factorizations the whitening results rest on.

mod cholesky;
mod eigen;
mod matrix;
mod polar;
mod qr;

pub use cholesky::{cholesky, CholeskyFactors};
pub use eigen::{eig_hermitian, EigenFactors};
pub use matrix::{vector_norm, ComplexMatrix};
pub use polar::{polar, PolarFactors};
pub use qr::{qr_posdiag, QRFactors};

use crate::error::{Error, Result};
use crate::tol;

/// Checks that `a` is square and Hermitian within `HERMITIAN_REL·‖a‖max`,
/// returning the explicitly symmetrized copy `(a + aᴴ)/2`.
pub(crate) fn hermitian_part(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let tolerance = tol::HERMITIAN_REL * a.max_abs_entry();
    let asymmetry = a.hermitian_asymmetry();
    if asymmetry > tolerance {
        return Err(Error::NotHermitian { asymmetry, tolerance });
    }
    Ok(a.symmetrized())
}
