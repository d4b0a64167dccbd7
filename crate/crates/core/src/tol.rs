//! Numerical tolerances shared across the crate.
//!
//! All values assume 64-bit IEEE arithmetic.

/// Hermitian check: `‖A − Aᴴ‖max ≤ HERMITIAN_REL · ‖A‖max`.
pub const HERMITIAN_REL: f64 = 1e-10;

/// Cholesky pivot floor relative to the largest diagonal entry.
pub const PIVOT_FLOOR_REL: f64 = 1e-12;

/// Jacobi stopping rule: off-diagonal Frobenius norm relative to `‖A‖F`.
pub const JACOBI_OFF_REL: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// QR rank floor relative to `‖A‖F`.
pub const RANK_FLOOR_REL: f64 = 1e-12;

/// Orthonormality tolerance on `‖QᴴQ − I‖max`.
pub const ORTHO: f64 = 1e-10;

/// Full-rank test: smallest singular value must exceed this times the largest.
pub const FULL_RANK_REL: f64 = 1e-12;

/// Default cap on the exhaustive ML search space.
pub const SEARCH_CAP: u64 = 1 << 20;

/// Whitening identity tolerance, `1e-9·M`.
pub fn white(m: usize) -> f64 {
    1e-9 * m.max(1) as f64
}

/// Monte Carlo whiteness threshold, `8/√n`.
pub fn monte_carlo(n: usize) -> f64 {
    8.0 / (n.max(1) as f64).sqrt()
}
