//! Extended whitening filters (EWFs).
//!
//! Each construction whitens the primary covariance with a base SWF `F`,
//! applies `F` to a secondary object, finds a unitary `Q` that gives the
//! filtered object the desired structure, and returns `W = Qᴴ·F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matdecomp::{eig_hermitian, polar, qr_posdiag, ComplexMatrix};
use crate::tol;
use crate::whitening::{check_swf, sandwich, swf_cholesky, CovarianceModel, FilterKind, WhiteningFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Decorrelate,
    Triangularize,
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EwfResult {
    pub w: WhiteningFilter,
    /// `Λ` (as a diagonal matrix), `R`, or `P`.
    pub byproduct: ComplexMatrix,
    pub corrective_q: ComplexMatrix,
    pub construction: Construction,
}

impl EwfResult {
    /// Structural residual of the byproduct: off-diagonal max for
    /// decorrelation, strict-lower max for triangularization, and
    /// `max(asymmetry, −λmin)` for the polar construction.
    pub fn structure_residual(&self) -> Result<f64> {
        Ok(match self.construction {
            Construction::Decorrelate => self.byproduct.off_diagonal_max(),
            Construction::Triangularize => self.byproduct.strict_lower_max(),
            Construction::Polar => {
                let asym = self.byproduct.hermitian_asymmetry();
                let min_eig = eig_hermitian(&self.byproduct.symmetrized())?
                    .lambda
                    .last()
                    .copied()
                    .unwrap_or(0.0);
                asym.max(-min_eig)
            }
        })
    }
}

fn base_or_cholesky(base: Option<&WhiteningFilter>, primary: &CovarianceModel) -> Result<ComplexMatrix> {
    match base {
        None => Ok(swf_cholesky(primary)?.into_matrix()),
        Some(f) => {
            let check = check_swf(f.matrix(), primary)?;
            if !check.is_swf {
                return Err(Error::NotAnSwf {
                    residual: check.residual,
                });
            }
            Ok(f.matrix().clone())
        }
    }
}

fn finish(
    f: &ComplexMatrix,
    q: ComplexMatrix,
    byproduct: ComplexMatrix,
    construction: Construction,
    primary: &CovarianceModel,
) -> Result<EwfResult> {
    let residual = q.orthonormality_residual();
    if residual > tol::ORTHO {
        return Err(Error::InternalInvariantViolation(format!(
            "corrective factor deviates from orthonormal by {residual:.3e}"
        )));
    }
    let w = WhiteningFilter::certify(&q.conj_transpose() * f, FilterKind::ExtendedWf, 1.0, primary)?;
    Ok(EwfResult {
        w,
        byproduct,
        corrective_q: q,
        construction,
    })
}

/// EWF that whitens `Σ` and decorrelates a second vector with covariance `Δ`:
/// `W·Δ·Wᴴ = Λ`, the eigenvalues of `F·Δ·Fᴴ` in descending order.
pub fn ewf_decorrelate(primary: &CovarianceModel, secondary: &CovarianceModel) -> Result<EwfResult> {
    ewf_decorrelate_with(None, primary, secondary)
}

pub fn ewf_decorrelate_with(
    base: Option<&WhiteningFilter>,
    primary: &CovarianceModel,
    secondary: &CovarianceModel,
) -> Result<EwfResult> {
    if primary.dim() != secondary.dim() {
        return Err(Error::DimensionMismatch(format!(
            "primary is {0}x{0}, secondary is {1}x{1}",
            primary.dim(),
            secondary.dim()
        )));
    }
    let f = base_or_cholesky(base, primary)?;
    let eig = eig_hermitian(&sandwich(&f, secondary.sigma()))?;
    let byproduct = ComplexMatrix::from_real_diagonal(&eig.lambda);
    finish(&f, eig.q, byproduct, Construction::Decorrelate, primary)
}

/// EWF that whitens `Σ` and triangularizes an M×N matrix `H` (M ≥ N):
/// `W·H = R`, upper triangular with a real positive diagonal.
///
/// For M > N the thin QR is used and `W` is N×M with `W·Σ·Wᴴ = I_N`.
pub fn ewf_triangularize(primary: &CovarianceModel, h: &ComplexMatrix) -> Result<EwfResult> {
    ewf_triangularize_with(None, primary, h)
}

pub fn ewf_triangularize_with(
    base: Option<&WhiteningFilter>,
    primary: &CovarianceModel,
    h: &ComplexMatrix,
) -> Result<EwfResult> {
    if h.rows() != primary.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H has {} rows, covariance is {1}x{1}",
            h.rows(),
            primary.dim()
        )));
    }
    let f = base_or_cholesky(base, primary)?;
    let qr = qr_posdiag(&(&f * h))?;
    finish(&f, qr.q, qr.r, Construction::Triangularize, primary)
}

/// EWF that whitens `Σ` and maps a square `S` to a Hermitian PSD `W·S = P`.
pub fn ewf_polar(primary: &CovarianceModel, s: &ComplexMatrix) -> Result<EwfResult> {
    ewf_polar_with(None, primary, s)
}

pub fn ewf_polar_with(
    base: Option<&WhiteningFilter>,
    primary: &CovarianceModel,
    s: &ComplexMatrix,
) -> Result<EwfResult> {
    if s.rows() != primary.dim() || s.cols() != primary.dim() {
        return Err(Error::DimensionMismatch(format!(
            "S is {}x{}, covariance is {2}x{2}",
            s.rows(),
            s.cols(),
            primary.dim()
        )));
    }
    let f = base_or_cholesky(base, primary)?;
    let pf = polar(&(&f * s))?;
    finish(&f, pf.q, pf.p, Construction::Polar, primary)
}
