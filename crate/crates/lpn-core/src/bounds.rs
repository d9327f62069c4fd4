//! Closed-form query-count bounds for the analog quantum solvers.
//!
//! The bounds answer: how many queries N suffice so that averaging the
//! (postselected) data voltages and thresholding recovers every key bit
//! with failure probability at most delta? They combine a Chernoff
//! typicality argument on the postselected count (slack delta_prime, and
//! delta_dprime for the distance of the count from its mean) with Gaussian
//! tail bounds on the averaged voltage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("register size {0} outside [1, 6]")]
    BadRegisterSize(usize),
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("bound diverges: eta_d = 0.5 leaves no signal")]
    NoSignal,
    #[error("slack terms reach their caps (1 - 3 delta' or 1 - delta'' vanishes)")]
    SlackExhausted,
}

/// Inputs of the closed-form bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    /// Ancilla assignment error; only its majority weight max(eta_a, 1-eta_a)
    /// enters the postselected bound.
    pub eta_a: f64,
    pub eta_d: f64,
    /// Per-query voltage spread in rescaled units.
    pub sigma: f64,
    /// Target failure probability for the whole key.
    pub delta: f64,
    pub delta_prime: f64,
    pub delta_dprime: f64,
}

impl BoundParams {
    /// Majority branch weight of the ancilla readout.
    pub fn eta_bar_a(&self) -> f64 {
        self.eta_a.max(1.0 - self.eta_a)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.n == 0 || self.n > 6 {
            return Err(BoundsError::BadRegisterSize(self.n));
        }
        let checks = [
            ("eta_a", self.eta_a, 0.0, 1.0),
            ("eta_d", self.eta_d, 0.0, 0.5),
            ("delta", self.delta, 0.0, 1.0),
            ("delta_prime", self.delta_prime, 0.0, 1.0 / 3.0),
            ("delta_dprime", self.delta_dprime, 0.0, 1.0),
        ];
        for (name, v, lo, hi) in checks {
            if !v.is_finite() || v < lo || v > hi {
                return Err(BoundsError::OutOfRange {
                    name,
                    value: v,
                    range: "parameter range",
                });
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(BoundsError::OutOfRange {
                name: "sigma",
                value: self.sigma,
                range: "(0, inf)",
            });
        }
        Ok(())
    }

    fn common_factors(&self) -> Result<(f64, f64), BoundsError> {
        self.validate()?;
        let signal = 0.5 - self.eta_d;
        if signal <= 0.0 {
            return Err(BoundsError::NoSignal);
        }
        let slack = 1.0 - 3.0 * self.delta_prime;
        if slack <= 0.0 {
            return Err(BoundsError::SlackExhausted);
        }
        Ok((signal, slack))
    }
}

/// Queries sufficient for the postselected analog quantum solver:
/// N = 4 sigma^2 / [(1-d'')^2 (1-3d')^2 (1/2-eta_d)^2 eta_bar_a^2] ln(n/2delta).
pub fn postselected_bound(p: &BoundParams) -> Result<f64, BoundsError> {
    let (signal, slack) = p.common_factors()?;
    let keep = 1.0 - p.delta_dprime;
    if keep <= 0.0 {
        return Err(BoundsError::SlackExhausted);
    }
    let eb = p.eta_bar_a();
    let denom = keep * keep * slack * slack * signal * signal * eb * eb;
    Ok(4.0 * p.sigma * p.sigma / denom * (p.n as f64 / (2.0 * p.delta)).ln())
}

/// Queries sufficient without postselection (ancilla ignored):
/// N = 8 sigma^2 / [(1-3d')^2 (1/2-eta_d)^2] ln(n/2delta).
pub fn no_postselect_bound(p: &BoundParams) -> Result<f64, BoundsError> {
    let (signal, slack) = p.common_factors()?;
    Ok(8.0 * p.sigma * p.sigma / (slack * slack * signal * signal) * (p.n as f64 / (2.0 * p.delta)).ln())
}

/// Chernoff lower bound 1 - 2 exp(-delta_prime^2 eta_bar_a N' / 3) on the
/// probability that the postselected count is delta_prime-typical. The raw
/// expression can go negative (it is a bound, not a probability), in which
/// case it is clamped to 0 and flagged.
pub fn typicality_probability(eta_bar_a: f64, n_prime: u64, delta_prime: f64) -> (f64, bool) {
    let raw = 1.0 - 2.0 * (-delta_prime * delta_prime * eta_bar_a * n_prime as f64 / 3.0).exp();
    if raw < 0.0 {
        (0.0, true)
    } else {
        (raw.min(1.0), false)
    }
}
