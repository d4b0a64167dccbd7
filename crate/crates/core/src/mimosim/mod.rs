//! MIMO detection in colored interference plus noise.
//!
//! With `y = H·x + v` and `Cov(v) = Σ`, the ML decision can be written three
//! equivalent ways: `‖F·y − F·H·x‖²` for any SWF `F`, `‖Qᴴ·F·y − R·x‖²`
//! after a QR of `F·H`, and `‖W·y − R·x‖²` with the triangularizing EWF
//! `W = Qᴴ·F`. The last needs one filtering product per received vector
//! instead of two.

mod constellation;
mod detect;
mod experiment;

pub use constellation::{Constellation, ConstellationKind};
pub use detect::{
    build_detector_bank, detect_ewf, detect_plain, detect_qr, transmit, BaseFilter, ChannelInstance, Detection,
    DetectionRecord, DetectorBank, Formulation,
};
pub use experiment::{
    noise_for_snr, run_experiment, DetectorStats, ExperimentConfig, ExperimentReport, NoiseCovarianceSpec, SnrPoint,
};
