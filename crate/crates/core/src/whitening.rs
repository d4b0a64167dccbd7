//! Standard whitening filters (SWFs).
//!
//! A matrix `F` is a whitening filter of a covariance `Σ` when
//! `F·Σ·Fᴴ = c²·I`, and a *standard* whitening filter when `c = 1`. Every
//! SWF is full rank, any unitary rotation of an SWF is again an SWF, and
//! every SWF factors as `Q·F_c` with `F_c = L⁻¹` the Cholesky-based filter.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matdecomp::{cholesky, eig_hermitian, qr_posdiag, ComplexMatrix};
use crate::{rng, tol};

/// A validated Hermitian positive-definite covariance with an optional mean.
///
/// The Cholesky factor is computed once at construction and doubles as the
/// positive-definiteness certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    sigma: ComplexMatrix,
    mean: Option<Vec<Complex64>>,
    chol: ComplexMatrix,
}

impl CovarianceModel {
    pub fn new(sigma: &ComplexMatrix) -> Result<Self> {
        let chol = cholesky(sigma)?.l;
        Ok(Self {
            sigma: sigma.symmetrized(),
            mean: None,
            chol,
        })
    }

    pub fn with_mean(mut self, mean: Vec<Complex64>) -> Result<Self> {
        if mean.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, covariance is {}x{}",
                mean.len(),
                self.dim(),
                self.dim()
            )));
        }
        self.mean = Some(mean);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn mean(&self) -> Option<&[Complex64]> {
        self.mean.as_deref()
    }

    /// Lower Cholesky factor `L` with `Σ = L·Lᴴ`.
    pub fn cholesky_factor(&self) -> &ComplexMatrix {
        &self.chol
    }

    /// The same model with `Σ` multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let model = Self::new(&self.sigma.scale_real(factor))?;
        Ok(Self {
            mean: self.mean.clone(),
            ..model
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    #[serde(rename = "CholeskySWF")]
    CholeskySwf,
    #[serde(rename = "EigenSWF")]
    EigenSwf,
    #[serde(rename = "RotatedSWF")]
    RotatedSwf,
    #[serde(rename = "ExtendedWF")]
    ExtendedWf,
}

/// A filter matrix certified against the covariance it was built for.
///
/// For every kind except a rectangular [`FilterKind::ExtendedWf`], `f` is
/// M×M; the extended triangularizing filter of an M×N channel (M > N) is
/// N×M and whitens onto `I_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "FilterRecord")]
pub struct WhiteningFilter {
    f: ComplexMatrix,
    kind: FilterKind,
    scale_c: f64,
}

/// Serialized form of a filter: `{"kind": ..., "scale_c": ..., "f": <matrix>}`.
///
/// Records read from disk are not certified; run [`check_swf`] or
/// [`WhiteningFilter::certify`] against a covariance before trusting one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub kind: FilterKind,
    pub scale_c: f64,
    pub f: ComplexMatrix,
}

impl From<WhiteningFilter> for FilterRecord {
    fn from(w: WhiteningFilter) -> Self {
        Self {
            kind: w.kind,
            scale_c: w.scale_c,
            f: w.f,
        }
    }
}

impl WhiteningFilter {
    /// Certifies `F·Σ·Fᴴ = c²·I` within `tol_white` and full row rank.
    pub fn certify(f: ComplexMatrix, kind: FilterKind, scale_c: f64, cov: &CovarianceModel) -> Result<Self> {
        if f.cols() != cov.dim() || f.rows() > f.cols() {
            return Err(Error::DimensionMismatch(format!(
                "filter is {}x{}, covariance is {}x{}",
                f.rows(),
                f.cols(),
                cov.dim(),
                cov.dim()
            )));
        }
        if scale_c.is_nan() || scale_c <= 0.0 {
            return Err(Error::InvalidConfig(format!("scale_c must be positive, got {scale_c}")));
        }
        let target = ComplexMatrix::identity(f.rows()).scale_real(scale_c * scale_c);
        let residual = sandwich(&f, cov.sigma()).max_abs_diff(&target);
        if residual > tol::white(cov.dim()) * scale_c * scale_c {
            return Err(Error::NotAnSwf { residual });
        }
        let sv = f.singular_values()?;
        let (largest, smallest) = (sv[0], sv[sv.len() - 1]);
        if smallest.is_nan() || smallest <= tol::FULL_RANK_REL * largest {
            return Err(Error::InternalInvariantViolation(format!(
                "whitening filter is not full rank (σmin/σmax = {:.3e})",
                smallest / largest
            )));
        }
        Ok(Self { f, kind, scale_c })
    }

    pub fn from_record(record: FilterRecord, cov: &CovarianceModel) -> Result<Self> {
        Self::certify(record.f, record.kind, record.scale_c, cov)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.f
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.f
    }

    /// Applies the filter to a vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.f.matvec(v)
    }
}

/// `F·Σ·Fᴴ`, symmetrized.
pub(crate) fn sandwich(f: &ComplexMatrix, sigma: &ComplexMatrix) -> ComplexMatrix {
    (&(f * sigma) * &f.conj_transpose()).symmetrized()
}

/// `‖F·Σ·Fᴴ − I‖max`; `F` may be rectangular (k×M).
pub fn whitening_residual(f: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if f.cols() != sigma.rows() {
        return Err(Error::DimensionMismatch(format!(
            "filter has {} columns, covariance is {}x{}",
            f.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    Ok(sandwich(f, sigma).identity_deviation())
}

/// Cholesky-based SWF `F_c = L⁻¹` (lower triangular).
pub fn swf_cholesky(cov: &CovarianceModel) -> Result<WhiteningFilter> {
    let f = cov.cholesky_factor().tri_lower_inverse()?;
    WhiteningFilter::certify(f, FilterKind::CholeskySwf, 1.0, cov)
}

/// Eigen-based SWF `F_v = Λ^{-1/2}·Qᴴ`, rows ordered by descending eigenvalue.
pub fn swf_eigen(cov: &CovarianceModel) -> Result<WhiteningFilter> {
    let eig = eig_hermitian(cov.sigma())?;
    let qh = eig.q.conj_transpose();
    let f = ComplexMatrix::from_fn(qh.rows(), qh.cols(), |i, j| qh[(i, j)] / eig.lambda[i].sqrt());
    WhiteningFilter::certify(f, FilterKind::EigenSwf, 1.0, cov)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwfCheck {
    pub is_swf: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WfCheck {
    pub is_wf: bool,
    pub c: f64,
    pub residual: f64,
}

fn require_square_filter(f: &ComplexMatrix, cov: &CovarianceModel) -> Result<()> {
    if f.rows() != cov.dim() || f.cols() != cov.dim() {
        return Err(Error::DimensionMismatch(format!(
            "filter is {}x{}, expected {}x{}",
            f.rows(),
            f.cols(),
            cov.dim(),
            cov.dim()
        )));
    }
    Ok(())
}

/// Tests `F·Σ·Fᴴ = I` within `tol_white`.
pub fn check_swf(f: &ComplexMatrix, cov: &CovarianceModel) -> Result<SwfCheck> {
    require_square_filter(f, cov)?;
    let residual = whitening_residual(f, cov.sigma())?;
    Ok(SwfCheck {
        is_swf: residual <= tol::white(cov.dim()),
        residual,
    })
}

/// Tests `F·Σ·Fᴴ = c²·I` for some `c > 0`, estimating `c` from the trace.
pub fn check_wf(f: &ComplexMatrix, cov: &CovarianceModel) -> Result<WfCheck> {
    require_square_filter(f, cov)?;
    let m = cov.dim();
    let s = sandwich(f, cov.sigma());
    let trace: f64 = s.diagonal().iter().map(|z| z.re).sum();
    let c2 = (trace / m as f64).max(0.0);
    let c = c2.sqrt();
    let residual = s.max_abs_diff(&ComplexMatrix::identity(m).scale_real(c2));
    Ok(WfCheck {
        is_wf: c > 0.0 && residual <= tol::white(m) * c2,
        c,
        residual,
    })
}

/// `Q·F` for unitary `Q`; the result is again an SWF.
pub fn rotate_swf(f: &WhiteningFilter, q: &ComplexMatrix, cov: &CovarianceModel) -> Result<WhiteningFilter> {
    if !q.is_square() || q.cols() != f.matrix().rows() {
        return Err(Error::DimensionMismatch(format!(
            "rotation is {}x{}, filter has {} rows",
            q.rows(),
            q.cols(),
            f.matrix().rows()
        )));
    }
    let residual = q.orthonormality_residual();
    if residual > tol::ORTHO {
        return Err(Error::NotOrthonormal { residual });
    }
    WhiteningFilter::certify(q * f.matrix(), FilterKind::RotatedSwf, 1.0, cov)
}

/// The unitary `Q` with `F = Q·F_c`, computed as `Q = F·L`.
pub fn orthonormal_factor(f: &WhiteningFilter, cov: &CovarianceModel) -> Result<ComplexMatrix> {
    let check = check_swf(f.matrix(), cov)?;
    if !check.is_swf {
        return Err(Error::NotAnSwf {
            residual: check.residual,
        });
    }
    let q = f.matrix() * cov.cholesky_factor();
    // QQᴴ − I = FΣFᴴ − I exactly, so the SWF tolerance carries over.
    let residual = q.orthonormality_residual();
    if residual > tol::white(cov.dim()) {
        return Err(Error::InternalInvariantViolation(format!(
            "orthonormal factor deviates from unitary by {residual:.3e}"
        )));
    }
    Ok(q)
}

/// Outcome of relating `F_v` and `F_c` through a positive-diagonal QR.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCholeskyRelation {
    /// `Q` from `qr_posdiag(F_v⁻ᴴ)`; satisfies `F_v = Q·F_c`.
    pub q: ComplexMatrix,
    /// `R` from the same factorization; equals `Lᴴ = F_c⁻ᴴ`.
    pub r: ComplexMatrix,
    /// `max(‖F_v − Q·F_c‖max, ‖R − Lᴴ‖max)`. Vanishes up to roundoff.
    pub max_residual: f64,
    /// The literal reading `(Q', R') = qr_posdiag(F_v)`, expecting `R' = F_c`.
    pub literal: LiteralQrReading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiteralQrReading {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    /// `‖F_v − Q'·F_c‖max`
    pub product_residual: f64,
    /// `‖R' − F_c‖max`
    pub triangle_residual: f64,
}

impl LiteralQrReading {
    pub fn max_residual(&self) -> f64 {
        self.product_residual.max(self.triangle_residual)
    }
}

/// Relates the eigen-based and Cholesky-based SWFs.
///
/// Since `F_v⁻¹(F_v⁻¹)ᴴ = Σ`, the positive-diagonal QR `F_v⁻ᴴ = Q·R` has
/// `RᴴR = Σ`, so `R = Lᴴ` by uniqueness of Cholesky and `F_v = Q·F_c`. The
/// factorization `F_v = Q'·R'` is reported as well: `R'` is upper triangular
/// while `F_c` is lower, so it only matches `F_c` in special cases such as
/// diagonal `Σ`.
pub fn eigen_cholesky_relation(cov: &CovarianceModel) -> Result<EigenCholeskyRelation> {
    let eig = eig_hermitian(cov.sigma())?;
    let f_v = swf_eigen(cov)?.into_matrix();
    let f_c = swf_cholesky(cov)?.into_matrix();
    let l_h = cov.cholesky_factor().conj_transpose();

    // F_v⁻ᴴ = (Q_e·Λ^{1/2})ᴴ = Λ^{1/2}·Q_eᴴ
    let qh = eig.q.conj_transpose();
    let f_v_inv_h = ComplexMatrix::from_fn(qh.rows(), qh.cols(), |i, j| qh[(i, j)] * eig.lambda[i].sqrt());
    let validated = qr_posdiag(&f_v_inv_h)?;
    let max_residual = f_v.max_abs_diff(&(&validated.q * &f_c)).max(validated.r.max_abs_diff(&l_h));

    let literal = qr_posdiag(&f_v)?;
    let literal = LiteralQrReading {
        product_residual: f_v.max_abs_diff(&(&literal.q * &f_c)),
        triangle_residual: literal.r.max_abs_diff(&f_c),
        q: literal.q,
        r: literal.r,
    };
    Ok(EigenCholeskyRelation {
        q: validated.q,
        r: validated.r,
        max_residual,
        literal,
    })
}

/// A random SWF `Q·F_c` with `Q` a seeded Haar unitary.
pub fn random_swf(cov: &CovarianceModel, seed: u64) -> Result<WhiteningFilter> {
    let q = rng::random_orthonormal(cov.dim(), seed);
    rotate_swf(&swf_cholesky(cov)?, &q, cov)
}

/// Mean of the filtered vector, `F·μ`.
pub fn transformed_mean(f: &WhiteningFilter, mean: &[Complex64]) -> Result<Vec<Complex64>> {
    f.apply(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn cov(rows: &[&[f64]]) -> CovarianceModel {
        CovarianceModel::new(&real(rows)).unwrap()
    }

    #[test]
    fn cholesky_swf_examples() {
        let f = swf_cholesky(&cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(f.matrix(), &ComplexMatrix::identity(2));
        assert_eq!(f.kind(), FilterKind::CholeskySwf);
        assert_eq!(f.scale_c(), 1.0);

        let f = swf_cholesky(&cov(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        assert!(
            f.matrix()
                .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 1.0 / 3.0]))
                < 1e-16
        );

        let c = cov(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let f = swf_cholesky(&c).unwrap();
        let expected = real(&[&[1.0 / 2f64.sqrt(), 0.0], &[-1.0 / 6f64.sqrt(), (2.0f64 / 3.0).sqrt()]]);
        assert!(f.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(check_swf(f.matrix(), &c).unwrap().residual < 1e-15);
    }

    #[test]
    fn eigen_swf_examples() {
        let f = swf_eigen(&cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(check_swf(f.matrix(), &cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap().is_swf);

        let f = swf_eigen(&cov(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        let expected = real(&[&[0.0, 1.0 / 3.0], &[0.5, 0.0]]);
        assert!(f.matrix().max_abs_diff(&expected) < 1e-16);

        // Rows (1/√3)[1,1]/√2 and [1,−1]/√2, each up to a phase.
        let c = cov(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let f = swf_eigen(&c).unwrap();
        let s = 0.5f64.sqrt();
        let rows = [[s / 3f64.sqrt(), s / 3f64.sqrt()], [s, -s]];
        for (i, row) in rows.iter().enumerate() {
            let got = f.matrix().row(i);
            let phase = got[0] / row[0];
            assert!((phase.norm() - 1.0).abs() < 1e-14);
            for j in 0..2 {
                assert!((got[j] - phase * row[j]).norm() < 1e-14);
            }
        }
        assert!(check_swf(f.matrix(), &c).unwrap().is_swf);
    }

    #[test]
    fn swf_and_wf_checks() {
        let c = cov(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let id = ComplexMatrix::identity(2);
        let ok = check_swf(&id, &cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(ok.is_swf && ok.residual == 0.0);

        let fc = swf_cholesky(&c).unwrap();
        let doubled = fc.matrix().scale_real(2.0);
        assert!(!check_swf(&doubled, &c).unwrap().is_swf);
        let wf = check_wf(&doubled, &c).unwrap();
        assert!(wf.is_wf && (wf.c - 2.0).abs() < 1e-14);

        let wf = check_wf(&id, &cov(&[&[4.0, 0.0], &[0.0, 4.0]])).unwrap();
        assert!(wf.is_wf && wf.c == 2.0);
        let wf = check_wf(fc.matrix(), &c).unwrap();
        assert!(wf.is_wf && (wf.c - 1.0).abs() < 1e-15);

        let mut zeroed = fc.matrix().clone();
        zeroed[(1, 0)] = Complex64::new(0.0, 0.0);
        zeroed[(1, 1)] = Complex64::new(0.0, 0.0);
        assert!(!check_wf(&zeroed, &c).unwrap().is_wf);

        assert!(matches!(
            check_swf(&ComplexMatrix::identity(3), &c),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            check_wf(&ComplexMatrix::zeros(2, 3), &c),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rotation_examples() {
        let c = cov(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let fc = swf_cholesky(&c).unwrap();
        let same = rotate_swf(&fc, &ComplexMatrix::identity(2), &c).unwrap();
        assert_eq!(same.matrix(), fc.matrix());
        assert_eq!(same.kind(), FilterKind::RotatedSwf);

        let perm = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let permuted = rotate_swf(&fc, &perm, &c).unwrap();
        assert_eq!(permuted.matrix().row(0), fc.matrix().row(1));
        assert_eq!(permuted.matrix().row(1), fc.matrix().row(0));

        let not_unitary = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            rotate_swf(&fc, &not_unitary, &c),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn orthonormal_factor_examples() {
        let c = cov(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let fc = swf_cholesky(&c).unwrap();
        assert!(orthonormal_factor(&fc, &c).unwrap().identity_deviation() < 1e-15);

        let fv = swf_eigen(&c).unwrap();
        let q = orthonormal_factor(&fv, &c).unwrap();
        let relation = eigen_cholesky_relation(&c).unwrap();
        assert!(q.max_abs_diff(&relation.q) < 1e-14);

        // A filter certified against Σ = I is not an SWF of [[2,1],[1,2]].
        let other = swf_cholesky(&cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(matches!(orthonormal_factor(&other, &c), Err(Error::NotAnSwf { .. })));
    }

    #[test]
    fn relation_on_identity_and_diagonal() {
        let r = eigen_cholesky_relation(&cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(r.q, ComplexMatrix::identity(2));
        assert_eq!(r.max_residual, 0.0);

        let r = eigen_cholesky_relation(&cov(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        let anti = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(r.q.max_abs_diff(&anti) < 1e-15);
        assert!(r.max_residual <= 1e-9);
        // For diagonal Σ both readings agree.
        assert!(r.literal.max_residual() <= 1e-9);
    }

    #[test]
    fn literal_reading_fails_for_correlated_covariance() {
        let r = eigen_cholesky_relation(&cov(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!(r.max_residual < 1e-14);
        assert!(r.literal.max_residual() > 0.1);
    }

    #[test]
    fn random_swf_is_deterministic() {
        let c = cov(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let a = random_swf(&c, 5).unwrap();
        let b = random_swf(&c, 5).unwrap();
        let other = random_swf(&c, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.matrix(), other.matrix());
        assert!(check_swf(other.matrix(), &c).unwrap().is_swf);
    }

    #[test]
    fn transformed_mean_examples() {
        let c = cov(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let f = swf_cholesky(&c).unwrap();
        let mu = vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let out = transformed_mean(&f, &mu).unwrap();
        assert!((out[0] - 1.0).norm() < 1e-15 && (out[1] - 1.0).norm() < 1e-15);
        let zero = transformed_mean(&f, &[Complex64::new(0.0, 0.0); 2]).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
        assert!(transformed_mean(&f, &mu[..1]).is_err());
    }

    #[test]
    fn covariance_model_validation() {
        assert!(CovarianceModel::new(&real(&[&[1.0, 2.0], &[2.0, 1.0]])).is_err());
        let c = cov(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(c.clone().with_mean(vec![Complex64::new(1.0, 0.0)]).is_err());
        let c = c.with_mean(vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert_eq!(c.mean().unwrap().len(), 2);
    }

    #[test]
    fn filter_json_layout() {
        let f = swf_cholesky(&cov(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["kind"], "CholeskySWF");
        assert_eq!(json["scale_c"], 1.0);
        assert_eq!(json["f"]["rows"], 2);
        let record: FilterRecord = serde_json::from_value(json).unwrap();
        assert_eq!(record.f, *f.matrix());
    }
}
