mod common;

use common::{gauss_jordan_inverse, power_traces, random_cov, random_matrix, random_sigma};
use ewfkit::ewf::{ewf_decorrelate, ewf_triangularize, ewf_triangularize_with};
use ewfkit::matdecomp::{cholesky, eig_hermitian, polar, qr_posdiag};
use ewfkit::rng::random_orthonormal;
use ewfkit::whitening::{
    check_swf, eigen_cholesky_relation, orthonormal_factor, random_swf, rotate_swf, swf_cholesky, swf_eigen,
    transformed_mean, CovarianceModel,
};
use ewfkit::{Complex64, ComplexMatrix};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cholesky_round_trip(m in 1usize..=16, seed in any::<u64>()) {
        let sigma = random_sigma(m, seed);
        let l = cholesky(&sigma).unwrap().l;
        prop_assert_eq!(l.strict_upper_max(), 0.0);
        prop_assert!(l.diagonal().iter().all(|d| d.im == 0.0 && d.re > 0.0));
        let back = &l * &l.conj_transpose();
        prop_assert!(back.sub(&sigma).unwrap().frobenius_norm() <= 1e-10 * sigma.frobenius_norm());
    }

    #[test]
    fn eigen_round_trip(m in 1usize..=16, seed in any::<u64>()) {
        let sigma = random_sigma(m, seed);
        let e = eig_hermitian(&sigma).unwrap();
        prop_assert!(e.q.orthonormality_residual() <= 1e-9);
        let err = e.reconstruct().sub(&sigma).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-9 * sigma.frobenius_norm());
        prop_assert!(e.lambda.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn qr_is_deterministic_and_valid(rows in 1usize..=8, extra in 0usize..=3, seed in any::<u64>()) {
        let a = random_matrix(rows + extra, rows, seed);
        let first = qr_posdiag(&a).unwrap();
        let second = qr_posdiag(&a).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert!(first.q.orthonormality_residual() <= 1e-12);
        prop_assert!((&first.q * &first.r).sub(&a).unwrap().frobenius_norm() <= 1e-12 * a.frobenius_norm());
        prop_assert!(first.r.diagonal().iter().all(|d| d.im == 0.0 && d.re > 0.0));
        prop_assert_eq!(first.r.strict_lower_max(), 0.0);
    }

    #[test]
    fn polar_spectrum_is_singular_values(m in 1usize..=8, seed in any::<u64>()) {
        let s = random_matrix(m, m, seed);
        let f = polar(&s).unwrap();
        prop_assert!(f.q.orthonormality_residual() <= 1e-10);
        prop_assert!(f.p.hermitian_asymmetry() <= 1e-12);
        prop_assert!((&f.q * &f.p).sub(&s).unwrap().frobenius_norm() <= 1e-10 * s.frobenius_norm());
        let p_eig = eig_hermitian(&f.p).unwrap().lambda;
        let gram = eig_hermitian(&(&s.conj_transpose() * &s)).unwrap().lambda;
        for (a, b) in p_eig.iter().zip(&gram) {
            prop_assert!((a - b.max(0.0).sqrt()).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    /// Any unitary rotation of an SWF is an SWF.
    #[test]
    fn orthonormal_closure(m in dims(), seed in any::<u64>()) {
        let cov = random_cov(m, seed);
        let q = random_orthonormal(m, seed ^ 0xabc);
        let w = rotate_swf(&swf_cholesky(&cov).unwrap(), &q, &cov).unwrap();
        prop_assert!(check_swf(w.matrix(), &cov).unwrap().is_swf);
        let wv = rotate_swf(&swf_eigen(&cov).unwrap(), &q, &cov).unwrap();
        prop_assert!(check_swf(wv.matrix(), &cov).unwrap().is_swf);
    }

    /// Every SWF factors as `Q·F_c`, and the factor is recovered exactly.
    #[test]
    fn unitary_factor_round_trip(m in dims(), seed in any::<u64>()) {
        let cov = random_cov(m, seed);
        let q0 = random_orthonormal(m, seed.wrapping_add(1));
        let rotated = rotate_swf(&swf_cholesky(&cov).unwrap(), &q0, &cov).unwrap();
        let q = orthonormal_factor(&rotated, &cov).unwrap();
        prop_assert!(q.max_abs_diff(&q0) <= 1e-9);
    }

    /// `‖F·μ‖ ≥ σmin(F) > 0` for unit `μ`: no SWF removes a nonzero mean.
    #[test]
    fn nonzero_mean_survives(m in dims(), seed in any::<u64>()) {
        let cov = random_cov(m, seed);
        let f = random_swf(&cov, seed).unwrap();
        let mut mu = ewfkit::rng::complex_gaussian_vector(seed, 1, m);
        let norm = ewfkit::matdecomp::vector_norm(&mu);
        mu.iter_mut().for_each(|z| *z /= norm);
        let sv = f.matrix().singular_values().unwrap();
        let smallest = *sv.last().unwrap();
        prop_assert!(smallest > 1e-12 * sv[0]);
        let out = transformed_mean(&f, &mu).unwrap();
        prop_assert!(ewfkit::matdecomp::vector_norm(&out) >= smallest * (1.0 - 1e-12));
    }

    #[test]
    fn eigen_and_cholesky_filters_are_related(seed in any::<u64>()) {
        let r = eigen_cholesky_relation(&random_cov(4, seed)).unwrap();
        prop_assert!(r.max_residual <= 1e-8);
        prop_assert!(r.q.orthonormality_residual() <= 1e-10);
    }

    #[test]
    fn random_swf_always_whitens(m in dims(), seed in any::<u64>()) {
        let cov = random_cov(m, seed);
        let f = random_swf(&cov, seed).unwrap();
        prop_assert!(check_swf(f.matrix(), &cov).unwrap().is_swf);
        prop_assert_eq!(f, random_swf(&cov, seed).unwrap());
    }

    /// The triangular factor does not depend on which SWF the EWF starts from.
    #[test]
    fn triangular_factor_is_base_independent(m in dims(), seed in any::<u64>()) {
        let cov = random_cov(m, seed);
        let h = random_matrix(m, m, seed);
        let reference = ewf_triangularize(&cov, &h).unwrap().byproduct;
        for s in 0..3u64 {
            let base = random_swf(&cov, seed.wrapping_add(s)).unwrap();
            let r = ewf_triangularize_with(Some(&base), &cov, &h).unwrap().byproduct;
            prop_assert!(r.max_abs_diff(&reference) <= 1e-8);
        }
    }

    /// diag(Λ) equals the spectrum of Δ·Σ⁻¹, checked through power sums
    /// `Σ λᵏ = trace((Δ·Σ⁻¹)ᵏ)` with an independent inverse.
    #[test]
    fn decorrelation_spectrum(m in dims(), seed in any::<u64>()) {
        let sigma = random_cov(m, seed);
        let delta = random_cov(m, seed ^ 0x55);
        let r = ewf_decorrelate(&sigma, &delta).unwrap();
        let lambda: Vec<f64> = r.byproduct.diagonal().iter().map(|z| z.re).collect();
        let product = delta.sigma() * &gauss_jordan_inverse(sigma.sigma());
        for (k, trace) in power_traces(&product, m).iter().enumerate() {
            let sum: f64 = lambda.iter().map(|l| l.powi(k as i32 + 1)).sum();
            prop_assert!((sum - trace.re).abs() <= 1e-8 * sum.abs().max(1.0), "k={} {} vs {}", k + 1, sum, trace);
            prop_assert!(trace.im.abs() <= 1e-8 * sum.abs().max(1.0));
        }
    }

    #[test]
    fn covariance_model_rejects_indefinite(m in 2usize..=6, seed in any::<u64>()) {
        let mut s = random_sigma(m, seed);
        s[(m - 1, m - 1)] = Complex64::new(-1.0, 0.0);
        prop_assert!(CovarianceModel::new(&s).is_err());
    }
}

#[test]
fn rectangular_triangularization_whitens_onto_subspace() {
    for seed in 0..20 {
        let cov = random_cov(5, seed);
        let h = random_matrix(5, 3, seed);
        let r = ewf_triangularize(&cov, &h).unwrap();
        let w = r.w.matrix();
        assert_eq!((w.rows(), w.cols()), (3, 5));
        assert!((w * &h).strict_lower_max() <= 1e-9);
        let white = &(w * cov.sigma()) * &w.conj_transpose();
        assert!(white.identity_deviation() <= 1e-9);
        assert!((w * &h).max_abs_diff(&r.byproduct) <= 1e-9);
    }
}

#[test]
fn identity_matrix_json_round_trip() {
    let m = random_matrix(3, 2, 1);
    let text = serde_json::to_string(&m).unwrap();
    let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
}
