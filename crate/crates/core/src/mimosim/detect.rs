use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constellation::Constellation;
use crate::error::{Error, Result};
use crate::ewf::{ewf_triangularize_with, EwfResult};
use crate::matdecomp::{qr_posdiag, ComplexMatrix, QRFactors};
use crate::stats::sample_colored;
use crate::whitening::{random_swf, swf_cholesky, swf_eigen, CovarianceModel, WhiteningFilter};
use crate::{rng, tol};

const NOISE_TAG: u64 = 0x006e_6f69_7365;

/// `y = H·x + v`, with `v` zero-mean colored Gaussian of covariance `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    h: ComplexMatrix,
    noise_cov: CovarianceModel,
    constellation: Constellation,
}

impl ChannelInstance {
    /// Requires `N_R ≥ N_T`, a full-column-rank `H` and an `N_R×N_R` covariance.
    pub fn new(h: ComplexMatrix, noise_cov: CovarianceModel, constellation: Constellation) -> Result<Self> {
        if h.rows() < h.cols() || h.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "channel must have N_R >= N_T >= 1, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if noise_cov.dim() != h.rows() {
            return Err(Error::DimensionMismatch(format!(
                "noise covariance is {0}x{0}, channel has {1} receive antennas",
                noise_cov.dim(),
                h.rows()
            )));
        }
        qr_posdiag(&h)?;
        Ok(Self {
            h,
            noise_cov,
            constellation,
        })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn noise_cov(&self) -> &CovarianceModel {
        &self.noise_cov
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn n_t(&self) -> usize {
        self.h.cols()
    }

    pub fn n_r(&self) -> usize {
        self.h.rows()
    }

    pub fn symbols(&self, x_indices: &[usize]) -> Result<Vec<Complex64>> {
        if x_indices.len() != self.n_t() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} symbol indices, got {}",
                self.n_t(),
                x_indices.len()
            )));
        }
        let size = self.constellation.len();
        x_indices
            .iter()
            .map(|&index| {
                self.constellation
                    .points()
                    .get(index)
                    .copied()
                    .ok_or(Error::BadSymbolIndex { index, size })
            })
            .collect()
    }
}

/// Received vector for one trial: `y = H·x + noise_scale·v`, where `v` is
/// sample 0 of `sample_colored(Σ, 1, derive_seed(noise_seed, NOISE_TAG, trial))`.
pub fn transmit(
    chan: &ChannelInstance,
    x_indices: &[usize],
    noise_seed: u64,
    trial: u64,
    noise_scale: f64,
) -> Result<Vec<Complex64>> {
    let x = chan.symbols(x_indices)?;
    let mut y = chan.h.matvec(&x)?;
    if noise_scale != 0.0 {
        let seed = rng::derive_seed(noise_seed, NOISE_TAG, trial);
        let v = sample_colored(&chan.noise_cov, 1, seed)?.samples.swap_remove(0);
        for (yk, vk) in y.iter_mut().zip(&v) {
            *yk += vk * noise_scale;
        }
    }
    Ok(y)
}

/// Which SWF the detector bank whitens with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFilter {
    #[default]
    Cholesky,
    Eigen,
    Random(u64),
}

impl BaseFilter {
    pub fn build(self, cov: &CovarianceModel) -> Result<WhiteningFilter> {
        match self {
            BaseFilter::Cholesky => swf_cholesky(cov),
            BaseFilter::Eigen => swf_eigen(cov),
            BaseFilter::Random(seed) => random_swf(cov, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// `argmin ‖F·y − Ĥ·x‖²`
    Plain,
    /// `argmin ‖Qᴴ·F·y − R·x‖²`
    Qr,
    /// `argmin ‖W·y − R·x‖²`
    Ewf,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::Plain, Formulation::Qr, Formulation::Ewf];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Plain => "plain",
            Formulation::Qr => "qr",
            Formulation::Ewf => "ewf",
        }
    }
}

/// Filters and factors prepared once per channel.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    pub f: WhiteningFilter,
    /// `Ĥ = F·H`
    pub h_hat: ComplexMatrix,
    pub qr_of_h_hat: QRFactors,
    pub ewf: EwfResult,
    q_h: ComplexMatrix,
    constellation: Constellation,
    n_r: usize,
    search_cap: u64,
}

pub fn build_detector_bank(chan: &ChannelInstance, base: BaseFilter) -> Result<DetectorBank> {
    let f = base.build(&chan.noise_cov)?;
    let h_hat = f.matrix() * &chan.h;
    let qr_of_h_hat = qr_posdiag(&h_hat)?;
    let ewf = ewf_triangularize_with(Some(&f), &chan.noise_cov, &chan.h)?;
    let gap = qr_of_h_hat.r.max_abs_diff(&ewf.byproduct);
    if gap > 1e-8 {
        return Err(Error::InternalInvariantViolation(format!(
            "QR and EWF triangular factors differ by {gap:.3e}"
        )));
    }
    Ok(DetectorBank {
        q_h: qr_of_h_hat.q.conj_transpose(),
        f,
        h_hat,
        qr_of_h_hat,
        ewf,
        constellation: chan.constellation.clone(),
        n_r: chan.n_r(),
        search_cap: tol::SEARCH_CAP,
    })
}

impl DetectorBank {
    pub fn with_search_cap(mut self, cap: u64) -> Self {
        self.search_cap = cap;
        self
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn n_t(&self) -> usize {
        self.h_hat.cols()
    }

    /// The filtered observation and the matrix it is compared against.
    fn front_end(&self, y: &[Complex64], formulation: Formulation) -> Result<(Vec<Complex64>, &ComplexMatrix, usize)> {
        if y.len() != self.n_r {
            return Err(Error::DimensionMismatch(format!(
                "received vector has length {}, expected {}",
                y.len(),
                self.n_r
            )));
        }
        let mut counter = MatvecCounter::default();
        let (target, basis) = match formulation {
            Formulation::Plain => (counter.apply(self.f.matrix(), y)?, &self.h_hat),
            Formulation::Qr => {
                let y_hat = counter.apply(self.f.matrix(), y)?;
                (counter.apply(&self.q_h, &y_hat)?, &self.qr_of_h_hat.r)
            }
            // Single product: W already contains Qᴴ.
            Formulation::Ewf => (counter.apply(self.ewf.w.matrix(), y)?, &self.ewf.byproduct),
        };
        Ok((target, basis, counter.0))
    }

    pub fn detect(&self, y: &[Complex64], formulation: Formulation) -> Result<Detection> {
        let (target, basis, front_end_matvecs) = self.front_end(y, formulation)?;
        let search = Search::new(basis, &self.constellation, self.search_cap)?;
        let (x_hat, objective) = search.argmin(&target);
        Ok(Detection {
            x_hat,
            objective,
            front_end_matvecs,
        })
    }

    /// Objective value of every candidate, in lexicographic candidate order.
    pub fn candidate_objectives(&self, y: &[Complex64], formulation: Formulation) -> Result<Vec<f64>> {
        let (target, basis, _) = self.front_end(y, formulation)?;
        let search = Search::new(basis, &self.constellation, self.search_cap)?;
        Ok(search.objectives(&target))
    }

    /// Runs all three formulations on one received vector.
    pub fn detect_all(&self, x_true: &[usize], y: &[Complex64]) -> Result<DetectionRecord> {
        let plain = self.detect(y, Formulation::Plain)?;
        let qr = self.detect(y, Formulation::Qr)?;
        let ewf = self.detect(y, Formulation::Ewf)?;
        Ok(DetectionRecord {
            x_true: x_true.to_vec(),
            agree: plain.x_hat == qr.x_hat && qr.x_hat == ewf.x_hat,
            plain,
            qr,
            ewf,
        })
    }
}

pub fn detect_plain(bank: &DetectorBank, y: &[Complex64]) -> Result<Detection> {
    bank.detect(y, Formulation::Plain)
}

pub fn detect_qr(bank: &DetectorBank, y: &[Complex64]) -> Result<Detection> {
    bank.detect(y, Formulation::Qr)
}

pub fn detect_ewf(bank: &DetectorBank, y: &[Complex64]) -> Result<Detection> {
    bank.detect(y, Formulation::Ewf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub x_hat: Vec<usize>,
    pub objective: f64,
    /// Matrix-vector products spent filtering the received vector.
    pub front_end_matvecs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub x_true: Vec<usize>,
    pub plain: Detection,
    pub qr: Detection,
    pub ewf: Detection,
    pub agree: bool,
}

impl DetectionRecord {
    pub fn get(&self, formulation: Formulation) -> &Detection {
        match formulation {
            Formulation::Plain => &self.plain,
            Formulation::Qr => &self.qr,
            Formulation::Ewf => &self.ewf,
        }
    }
}

#[derive(Default)]
struct MatvecCounter(usize);

impl MatvecCounter {
    fn apply(&mut self, m: &ComplexMatrix, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.0 += 1;
        m.matvec(v)
    }
}

/// Exhaustive search over `|C|^N_T` candidates. Candidates are enumerated
/// lexicographically (first antenna most significant) and only a strictly
/// smaller objective replaces the incumbent, so ties go to the smallest
/// index vector.
struct Search {
    /// `columns[j][p]` is column `j` of the basis times constellation point `p`.
    columns: Vec<Vec<Vec<Complex64>>>,
    order: usize,
    n_t: usize,
}

impl Search {
    fn new(basis: &ComplexMatrix, constellation: &Constellation, cap: u64) -> Result<Self> {
        let order = constellation.len();
        let n_t = basis.cols();
        let size = (order as u128).checked_pow(n_t as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::SearchSpaceTooLarge { size, cap });
        }
        let columns = (0..n_t)
            .map(|j| {
                let col = basis.column(j);
                constellation
                    .points()
                    .iter()
                    .map(|p| col.iter().map(|a| a * p).collect())
                    .collect()
            })
            .collect();
        Ok(Self { columns, order, n_t })
    }

    fn for_each(&self, target: &[Complex64], mut visit: impl FnMut(&[usize], f64)) {
        let mut idx = vec![0usize; self.n_t];
        let mut residual = vec![Complex64::new(0.0, 0.0); target.len()];
        loop {
            residual.copy_from_slice(target);
            for (j, &p) in idx.iter().enumerate() {
                for (r, a) in residual.iter_mut().zip(&self.columns[j][p]) {
                    *r -= a;
                }
            }
            let objective: f64 = residual.iter().map(|z| z.norm_sqr()).sum();
            visit(&idx, objective);

            let mut k = self.n_t;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.order {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn argmin(&self, target: &[Complex64]) -> (Vec<usize>, f64) {
        let mut best = (vec![0; self.n_t], f64::INFINITY);
        self.for_each(target, |idx, objective| {
            if objective < best.1 {
                best = (idx.to_vec(), objective);
            }
        });
        best
    }

    fn objectives(&self, target: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each(target, |_, objective| out.push(objective));
        out
    }
}
