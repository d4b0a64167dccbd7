//! Standard and extended whitening filters for complex random vectors.
//!
//! * [`matdecomp`]: dense complex matrices with Cholesky, Hermitian eigen,
//!   positive-diagonal QR and polar factorizations.
//! * [`whitening`]: construction and validation of standard whitening filters.
//! * [`ewf`]: extended whitening filters that also decorrelate, triangularize
//!   or polarize a secondary object.
//! * [`stats`]: seeded colored-Gaussian sampling and Monte Carlo whiteness checks.
//! * [`mimosim`]: MIMO ML detection with whitened, QR and EWF front ends.

pub mod error;
pub mod ewf;
pub mod matdecomp;
pub mod mimosim;
pub mod rng;
pub mod stats;
pub mod tol;
pub mod whitening;

pub use error::{Error, Result};
pub use matdecomp::ComplexMatrix;
pub use num_complex::Complex64;
