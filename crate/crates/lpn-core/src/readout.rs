//! Analog readout: voltages, calibration, digitization and thresholds.
//!
//! Each measured qubit produces a homodyne-style voltage drawn from a
//! Gaussian whose mean and spread depend on its true state. In rescaled
//! units the two component means sit at 0 and 1, and the assignment error
//! eta (probability that midpoint digitization disagrees with the true
//! state) fixes the component spread via sigma = 0.5 / probit(1 - eta).
//!
//! For the analog quantum solvers the averaged data voltage of a k_i = 1
//! qubit follows a two-component mixture (the postselected set contains a
//! fraction of false positives), so the optimal digitization threshold for
//! the average shifts below the naive midpoint. `calibrated_threshold`
//! computes that operating point from the mixture moments.

use crate::oracle::NoiseModel;
use crate::rng::SeedStream;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use thiserror::Error;

/// Assignment errors are clamped to this range before being converted to a
/// voltage spread: the floor keeps a noiseless configuration representable
/// (sigma stays finite and tiny instead of hitting the probit pole at
/// eta = 0), and the cap keeps the eta_a = 0.5 extrapolation point samplable
/// (at exactly 0.5 the spread diverges). Thresholds still use the configured
/// eta, only voltage generation is clamped.
pub const ETA_FLOOR: f64 = 1e-10;
pub const ETA_CAP: f64 = 0.49;

#[derive(Debug, Error, PartialEq)]
pub enum ReadoutError {
    #[error("eta = {0} outside (0, 0.5)")]
    EtaOutOfRange(f64),
    #[error("sigma = {0} must be positive and finite")]
    SigmaOutOfRange(f64),
    #[error("calibration needs at least 100 shots per point, got {0}")]
    TooFewShots(usize),
    #[error("estimated means are not separated (mu0 = {mu0}, mu1 = {mu1})")]
    MeansNotSeparated { mu0: f64, mu1: f64 },
    #[error("threshold is degenerate: component means coincide")]
    DegenerateThreshold,
}

/// Voltage statistics of one qubit's two readout populations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutParams {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma0: f64,
    pub sigma1: f64,
}

impl ReadoutParams {
    /// Equal-spread populations at 0 and 1.
    pub fn symmetric(sigma: f64) -> Self {
        ReadoutParams {
            mu0: 0.0,
            mu1: 1.0,
            sigma0: sigma,
            sigma1: sigma,
        }
    }

    /// Map a raw voltage onto the scale where the calibrated means sit at
    /// 0 and 1.
    pub fn rescale(&self, v: f64) -> f64 {
        (v - self.mu0) / (self.mu1 - self.mu0)
    }

    /// The parameters as seen after `rescale`.
    pub fn rescaled(&self) -> ReadoutParams {
        let span = self.mu1 - self.mu0;
        ReadoutParams {
            mu0: 0.0,
            mu1: 1.0,
            sigma0: self.sigma0 / span,
            sigma1: self.sigma1 / span,
        }
    }

    pub fn validate(&self) -> Result<(), ReadoutError> {
        if !(self.mu1 > self.mu0) {
            return Err(ReadoutError::MeansNotSeparated {
                mu0: self.mu0,
                mu1: self.mu1,
            });
        }
        for s in [self.sigma0, self.sigma1] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(ReadoutError::SigmaOutOfRange(s));
            }
        }
        Ok(())
    }
}

/// One oracle query's analog record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub v_a: f64,
    pub v_d: Vec<f64>,
}

/// Per-qubit readout statistics estimated from calibration shots.
/// Entries 0..n-1 are the data qubits, entry n the ancilla.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub qubits: Vec<ReadoutParams>,
    pub shots_per_point: usize,
}

impl CalibrationSet {
    pub fn n(&self) -> usize {
        self.qubits.len() - 1
    }

    pub fn data(&self, i: usize) -> &ReadoutParams {
        &self.qubits[i]
    }

    pub fn ancilla(&self) -> &ReadoutParams {
        &self.qubits[self.qubits.len() - 1]
    }

    /// A calibration that reports the exact population parameters, for
    /// synthetic batches in tests and bound checks.
    pub fn exact(params: Vec<ReadoutParams>, shots_per_point: usize) -> Self {
        CalibrationSet {
            qubits: params,
            shots_per_point,
        }
    }
}

/// One voltage draw, N(mu_bit, sigma_bit^2). A zero spread degenerates to
/// the mean itself.
pub fn sample_voltage<R: Rng + ?Sized>(bit: u8, params: &ReadoutParams, rng: &mut R) -> f64 {
    let (mu, sigma) = if bit == 0 {
        (params.mu0, params.sigma0)
    } else {
        (params.mu1, params.sigma1)
    };
    Normal::new(mu, sigma).expect("sigma must be non-negative").sample(rng)
}

/// Spread that produces assignment error `eta` under midpoint digitization
/// of populations at 0 and 1: sigma = 0.5 / probit(1 - eta).
pub fn sigma_from_eta(eta: f64) -> Result<f64, ReadoutError> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(ReadoutError::EtaOutOfRange(eta));
    }
    let probit = StdNormal::standard().inverse_cdf(1.0 - eta);
    Ok(0.5 / probit)
}

/// Exact inverse of [`sigma_from_eta`].
pub fn eta_from_sigma(sigma: f64) -> Result<f64, ReadoutError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(ReadoutError::SigmaOutOfRange(sigma));
    }
    Ok(1.0 - StdNormal::standard().cdf(0.5 / sigma))
}

/// True (not estimated) readout populations implied by a noise model, with
/// the eta clamp applied; data qubits first, ancilla last.
pub fn true_params(noise: &NoiseModel) -> Vec<ReadoutParams> {
    noise
        .eta_d
        .iter()
        .chain(std::iter::once(&noise.eta_a))
        .map(|&eta| {
            let sigma = sigma_from_eta(eta.clamp(ETA_FLOOR, ETA_CAP))
                .expect("clamped eta is always convertible");
            ReadoutParams::symmetric(sigma)
        })
        .collect()
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let m = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (samples.len() - 1) as f64;
    (m, var.sqrt())
}

/// Estimate per-qubit readout statistics from simulated calibration shots.
///
/// Runs n+2 calibration points: the all-ground preparation, then one point
/// per qubit with only that qubit excited. Every point draws `shots`
/// voltages per qubit; qubit q's excited statistics come from its own
/// excitation point, its ground statistics from the all-ground point.
pub fn calibrate_from_params<R: Rng + ?Sized>(
    truth: &[ReadoutParams],
    shots: usize,
    rng: &mut R,
) -> Result<CalibrationSet, ReadoutError> {
    if shots < 100 {
        return Err(ReadoutError::TooFewShots(shots));
    }
    let nq = truth.len();
    let mut buf = vec![0.0; shots];
    let mut ground: Vec<(f64, f64)> = Vec::with_capacity(nq);
    for params in truth {
        for v in buf.iter_mut() {
            *v = sample_voltage(0, params, rng);
        }
        ground.push(mean_and_std(&buf));
    }
    let mut qubits = Vec::with_capacity(nq);
    for excited_q in 0..nq {
        // excitation point: qubit excited_q in |1>, the rest in |0>
        let mut excited = (0.0, 0.0);
        for (q, params) in truth.iter().enumerate() {
            let bit = u8::from(q == excited_q);
            for v in buf.iter_mut() {
                *v = sample_voltage(bit, params, rng);
            }
            if q == excited_q {
                excited = mean_and_std(&buf);
            }
        }
        let est = ReadoutParams {
            mu0: ground[excited_q].0,
            mu1: excited.0,
            sigma0: ground[excited_q].1,
            sigma1: excited.1,
        };
        est.validate()?;
        qubits.push(est);
    }
    Ok(CalibrationSet {
        qubits,
        shots_per_point: shots,
    })
}

/// Calibration for the populations implied by `noise` (n data qubits plus
/// ancilla). Default shot budget in the harness is 10,000 per point.
pub fn generate_calibration<R: Rng + ?Sized>(
    noise: &NoiseModel,
    shots: usize,
    rng: &mut R,
) -> Result<CalibrationSet, ReadoutError> {
    calibrate_from_params(&true_params(noise), shots, rng)
}

/// Seeded convenience wrapper used by the campaign runner.
pub fn generate_calibration_seeded(
    noise: &NoiseModel,
    shots: usize,
    stream: SeedStream,
) -> Result<CalibrationSet, ReadoutError> {
    generate_calibration(noise, shots, &mut stream.rng())
}

/// 1 if v > threshold else 0; a tie digitizes to 0 for determinism.
pub fn digitize(v: f64, threshold: f64) -> u8 {
    u8::from(v > threshold)
}

/// Moments of the postselected k_i = 1 population: the mixture
/// eta_a P0 + (1 - eta_a) P1. Mean is the mixed mean and the variance
/// follows the law of total variance,
/// (1-eta) sigma1^2 + eta sigma0^2 + eta (1-eta) (mu1 - mu0)^2.
pub fn mixture_moments(params: &ReadoutParams, eta_a: f64) -> (f64, f64) {
    let e = eta_a;
    let mean = (1.0 - e) * params.mu1 + e * params.mu0;
    let dmu = params.mu1 - params.mu0;
    let var = (1.0 - e) * params.sigma1 * params.sigma1
        + e * params.sigma0 * params.sigma0
        + e * (1.0 - e) * dmu * dmu;
    (mean, var)
}

/// Discrimination threshold between the k_i = 0 population and the k_i = 1
/// mixture, both treated as Gaussians with moments from [`mixture_moments`].
///
/// Returns the crossing point that is the same number of standard
/// deviations from both means, i.e. the root of
/// v1 (x - m0)^2 = v0 (x - m1)^2 that lies between the means (the other
/// root is a spurious far-tail crossing). When the variances agree within
/// 1e-9 this reduces to the midpoint of the means. The choice is invariant
/// under scaling both variances by a common factor, and for the Q' solver
/// it is evaluated at eta_a = 0.5.
pub fn calibrated_threshold(params: &ReadoutParams, eta_a: f64) -> Result<f64, ReadoutError> {
    let (m1, v1) = mixture_moments(params, eta_a);
    let m0 = params.mu0;
    let v0 = params.sigma0 * params.sigma0;
    if !(m1 > m0) {
        return Err(ReadoutError::DegenerateThreshold);
    }
    if (v1 - v0).abs() < 1e-9 {
        return Ok(0.5 * (m0 + m1));
    }
    let (s0, s1) = (v0.sqrt(), v1.sqrt());
    Ok((m0 * s1 + m1 * s0) / (s0 + s1))
}
