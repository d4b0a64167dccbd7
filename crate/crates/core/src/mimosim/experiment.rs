//! Monte Carlo harness comparing the three ML detector formulations.
//!
//! Trial `t` draws its symbols from stream `t` of
//! `derive_seed(master, SYMBOL_TAG, 0)` and its noise from
//! `derive_seed(master, NOISE_TAG, 0)`, so every SNR point sees the same
//! symbols and the same unit noise realizations (common random numbers).
//! Trials run in parallel and are reduced in index order, so reports do not
//! depend on scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constellation::{Constellation, ConstellationKind};
use super::detect::{build_detector_bank, transmit, BaseFilter, ChannelInstance, DetectorBank, Formulation};
use crate::error::{Error, Result};
use crate::matdecomp::{qr_posdiag, ComplexMatrix};
use crate::whitening::CovarianceModel;
use crate::{rng, tol};

const CHANNEL_TAG: u64 = 0xc4a7;
const SYMBOL_TAG: u64 = 0x5e1b;
const NOISE_TAG: u64 = 0x2015;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseCovarianceSpec {
    Inline {
        matrix: ComplexMatrix,
    },
    RandomSpd {
        seed: u64,
        #[serde(default = "default_condition_number")]
        condition_number: f64,
    },
}

fn default_condition_number() -> f64 {
    10.0
}

fn default_noise_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub constellation: ConstellationKind,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Shape of the interference-plus-noise covariance; rescaled per SNR point.
    pub noise_covariance: NoiseCovarianceSpec,
    #[serde(default)]
    pub base_filter: BaseFilter,
    /// Extra base SWFs whose EWF decisions must match the primary bank's.
    #[serde(default)]
    pub cross_check_bases: Vec<BaseFilter>,
    /// Fixed channel; drawn from the master seed when absent.
    #[serde(default)]
    pub channel: Option<ComplexMatrix>,
    /// Multiplies every noise realization; `1e-6` approximates noiseless transmission.
    #[serde(default = "default_noise_scale")]
    pub noise_scale: f64,
    #[serde(default)]
    pub search_cap: Option<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_t == 0 || self.n_r < self.n_t {
            return bad(format!("need n_r >= n_t >= 1, got n_t={} n_r={}", self.n_t, self.n_r));
        }
        if let Some(x) = self.snr_db.iter().find(|x| !x.is_finite()) {
            return bad(format!("SNR values must be finite, got {x}"));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return bad(format!("noise_scale must be finite and >= 0, got {}", self.noise_scale));
        }
        if let Some(h) = &self.channel {
            if (h.rows(), h.cols()) != (self.n_r, self.n_t) {
                return bad(format!(
                    "channel is {}x{}, expected {}x{}",
                    h.rows(),
                    h.cols(),
                    self.n_r,
                    self.n_t
                ));
            }
        }
        if let NoiseCovarianceSpec::Inline { matrix } = &self.noise_covariance {
            if (matrix.rows(), matrix.cols()) != (self.n_r, self.n_r) {
                return bad(format!(
                    "noise covariance is {}x{}, expected {n}x{n}",
                    matrix.rows(),
                    matrix.cols(),
                    n = self.n_r
                ));
            }
        }
        let order = Constellation::new(self.constellation).len() as u128;
        let size = order.checked_pow(self.n_t as u32).unwrap_or(u128::MAX);
        let cap = self.search_cap.unwrap_or(tol::SEARCH_CAP);
        if size > cap as u128 {
            return Err(Error::SearchSpaceTooLarge { size, cap });
        }
        Ok(())
    }

    fn base_covariance(&self) -> Result<CovarianceModel> {
        let sigma = match &self.noise_covariance {
            NoiseCovarianceSpec::Inline { matrix } => matrix.clone(),
            NoiseCovarianceSpec::RandomSpd { seed, condition_number } => {
                rng::random_spd(self.n_r, *condition_number, *seed)?
            }
        };
        CovarianceModel::new(&sigma)
    }

    /// The configured channel, or a complex Gaussian draw resampled until it
    /// has full column rank.
    pub fn channel_matrix(&self) -> ComplexMatrix {
        if let Some(h) = &self.channel {
            return h.clone();
        }
        (0..)
            .map(|attempt| {
                rng::complex_gaussian_matrix(
                    self.n_r,
                    self.n_t,
                    rng::derive_seed(self.master_seed, CHANNEL_TAG, attempt),
                )
            })
            .find(|h| qr_posdiag(h).is_ok())
            .expect("unbounded search")
    }
}

/// Scales `Σ` so that `trace(H·Hᴴ)/trace(Σ) = 10^(snr/10)`.
pub fn noise_for_snr(h: &ComplexMatrix, shape: &CovarianceModel, snr_db: f64) -> Result<CovarianceModel> {
    let signal: f64 = (h * &h.conj_transpose()).diagonal().iter().map(|z| z.re).sum();
    let noise: f64 = shape.sigma().diagonal().iter().map(|z| z.re).sum();
    shape.scaled(signal / noise / 10f64.powf(snr_db / 10.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorStats {
    pub detector: Formulation,
    pub ser: f64,
    pub ber: f64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    /// Front-end matrix-vector products per detection.
    pub matvecs_per_detection: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub trials: usize,
    pub agree_fraction: f64,
    /// Mean of `|objective_plain − objective_qr|` at the decided vector.
    pub mean_objective_gap: f64,
    pub noise_covariance: ComplexMatrix,
    pub detectors: Vec<DetectorStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_t: usize,
    pub n_r: usize,
    pub constellation: ConstellationKind,
    pub base_filter: BaseFilter,
    pub master_seed: u64,
    pub channel: ComplexMatrix,
    pub points: Vec<SnrPoint>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    snr_db: f64,
    detector: &'a str,
    ser: f64,
    ber: f64,
    trials: usize,
    agree_fraction: f64,
}

impl ExperimentReport {
    /// One row per SNR point and detector:
    /// `snr_db,detector,ser,ber,trials,agree_fraction`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InternalInvariantViolation(format!("csv: {e}"));
        if self.points.is_empty() {
            w.write_record(["snr_db", "detector", "ser", "ber", "trials", "agree_fraction"])
                .map_err(io)?;
        }
        for p in &self.points {
            for d in &p.detectors {
                w.serialize(CsvRow {
                    snr_db: p.snr_db,
                    detector: d.detector.name(),
                    ser: d.ser,
                    ber: d.ber,
                    trials: p.trials,
                    agree_fraction: p.agree_fraction,
                })
                .map_err(io)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InternalInvariantViolation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Smallest agreement fraction over all SNR points (1.0 when empty).
    pub fn min_agree_fraction(&self) -> f64 {
        self.points.iter().map(|p| p.agree_fraction).fold(1.0, f64::min)
    }
}

struct TrialOutcome {
    symbol_errors: [u64; 3],
    bit_errors: [u64; 3],
    agree: bool,
    objective_gap: f64,
}

fn run_trial(
    chan: &ChannelInstance,
    bank: &DetectorBank,
    cross: &[DetectorBank],
    config: &ExperimentConfig,
    trial: usize,
) -> Result<TrialOutcome> {
    let n_t = chan.n_t();
    let order = chan.constellation().len();
    let mut sym_rng = rng::stream(rng::derive_seed(config.master_seed, SYMBOL_TAG, 0), trial as u64);
    let x: Vec<usize> = (0..n_t).map(|_| sym_rng.random_range(0..order)).collect();
    let noise_seed = rng::derive_seed(config.master_seed, NOISE_TAG, 0);
    let y = transmit(chan, &x, noise_seed, trial as u64, config.noise_scale)?;
    let record = bank.detect_all(&x, &y)?;

    let mut agree = record.agree;
    for other in cross {
        agree &= other.detect(&y, Formulation::Ewf)?.x_hat == record.ewf.x_hat;
    }
    let mut symbol_errors = [0u64; 3];
    let mut bit_errors = [0u64; 3];
    for (k, formulation) in Formulation::ALL.iter().enumerate() {
        let x_hat = &record.get(*formulation).x_hat;
        for (a, b) in x.iter().zip(x_hat) {
            if a != b {
                symbol_errors[k] += 1;
                bit_errors[k] += chan.constellation().bit_errors(*a, *b) as u64;
            }
        }
    }
    Ok(TrialOutcome {
        symbol_errors,
        bit_errors,
        agree,
        objective_gap: (record.plain.objective - record.qr.objective).abs(),
    })
}

/// Runs every SNR point of the configuration. With `trials = 0` the report
/// has no points.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let channel = config.channel_matrix();
    let mut report = ExperimentReport {
        n_t: config.n_t,
        n_r: config.n_r,
        constellation: config.constellation,
        base_filter: config.base_filter,
        master_seed: config.master_seed,
        channel: channel.clone(),
        points: Vec::new(),
    };
    if config.trials == 0 {
        return Ok(report);
    }
    let shape = config.base_covariance()?;
    let constellation = Constellation::new(config.constellation);
    let cap = config.search_cap.unwrap_or(tol::SEARCH_CAP);

    for &snr_db in &config.snr_db {
        let noise_cov = noise_for_snr(&channel, &shape, snr_db)?;
        let chan = ChannelInstance::new(channel.clone(), noise_cov.clone(), constellation.clone())?;
        let bank = build_detector_bank(&chan, config.base_filter)?.with_search_cap(cap);
        let cross = config
            .cross_check_bases
            .iter()
            .map(|b| Ok(build_detector_bank(&chan, *b)?.with_search_cap(cap)))
            .collect::<Result<Vec<_>>>()?;

        let outcomes = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(&chan, &bank, &cross, config, t))
            .collect::<Result<Vec<_>>>()?;

        let mut symbol_errors = [0u64; 3];
        let mut bit_errors = [0u64; 3];
        let mut agreed = 0usize;
        let mut gap_sum = 0.0;
        for o in &outcomes {
            for k in 0..3 {
                symbol_errors[k] += o.symbol_errors[k];
                bit_errors[k] += o.bit_errors[k];
            }
            agreed += o.agree as usize;
            gap_sum += o.objective_gap;
        }
        let trials = config.trials as f64;
        let symbols = trials * config.n_t as f64;
        let bits = symbols * constellation.bits_per_symbol() as f64;
        let probe = vec![num_complex::Complex64::new(0.0, 0.0); config.n_r];
        let detectors = Formulation::ALL
            .iter()
            .enumerate()
            .map(|(k, &detector)| {
                Ok(DetectorStats {
                    detector,
                    ser: symbol_errors[k] as f64 / symbols,
                    ber: bit_errors[k] as f64 / bits,
                    symbol_errors: symbol_errors[k],
                    bit_errors: bit_errors[k],
                    matvecs_per_detection: bank.detect(&probe, detector)?.front_end_matvecs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        report.points.push(SnrPoint {
            snr_db,
            trials: config.trials,
            agree_fraction: agreed as f64 / trials,
            mean_objective_gap: gap_sum / trials,
            noise_covariance: noise_cov.sigma().clone(),
            detectors,
        });
    }
    Ok(report)
}
