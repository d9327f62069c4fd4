//! The five key-learning strategies.
//!
//! Digital solvers first digitize every voltage with the calibrated midpoint
//! threshold and work on bits; analog solvers keep the data voltages and
//! digitize only once, after averaging. Classical solvers use every record,
//! quantum solvers postselect on the digitized ancilla (except Q', which
//! deliberately ignores the ancilla and compensates through its threshold).
//!
//! All tie-breaking is uniform at random from an explicit caller-provided
//! stream, and every estimate reports whether a tie was broken. Given the
//! batch and the stream state, solvers are pure.

mod prepared;

pub use prepared::PreparedPool;

use crate::oracle::{Key, OracleMode};
use crate::readout::{calibrated_threshold, digitize, CalibrationSet, QueryRecord};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("cannot solve an empty batch")]
    EmptyBatch,
    #[error("record {record} contains a non-finite voltage")]
    NonFiniteVoltage { record: usize },
    #[error("record {record} has {got} data voltages, expected {want}")]
    RecordLength { record: usize, got: usize, want: usize },
    #[error("calibration covers {got} qubits, batch needs {want}")]
    CalibrationLength { got: usize, want: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    CDigital,
    QDigital,
    CBayes,
    QAnalog,
    #[serde(rename = "qprime_analog")]
    QPrimeAnalog,
}

impl SolverId {
    pub const ALL: [SolverId; 5] = [
        SolverId::CDigital,
        SolverId::QDigital,
        SolverId::CBayes,
        SolverId::QAnalog,
        SolverId::QPrimeAnalog,
    ];

    /// Which oracle mode this solver's query records must come from.
    pub fn mode(self) -> OracleMode {
        match self {
            SolverId::CDigital | SolverId::CBayes => OracleMode::Classical,
            _ => OracleMode::Quantum,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::CDigital => "c_digital",
            SolverId::QDigital => "q_digital",
            SolverId::CBayes => "c_bayes",
            SolverId::QAnalog => "q_analog",
            SolverId::QPrimeAnalog => "qprime_analog",
        }
    }

    pub(crate) fn id(self) -> u64 {
        match self {
            SolverId::CDigital => 0,
            SolverId::QDigital => 1,
            SolverId::CBayes => 2,
            SolverId::QAnalog => 3,
            SolverId::QPrimeAnalog => 4,
        }
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown solver {s:?}"))
    }
}

/// A set of query records plus the calibration they were taken under.
#[derive(Clone, Debug)]
pub struct QueryBatch {
    pub n: usize,
    pub records: Vec<QueryRecord>,
    pub calibration: CalibrationSet,
}

impl QueryBatch {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.records.is_empty() {
            return Err(SolveError::EmptyBatch);
        }
        if self.calibration.n() != self.n {
            return Err(SolveError::CalibrationLength {
                got: self.calibration.n(),
                want: self.n,
            });
        }
        for (i, rec) in self.records.iter().enumerate() {
            if rec.v_d.len() != self.n {
                return Err(SolveError::RecordLength {
                    record: i,
                    got: rec.v_d.len(),
                    want: self.n,
                });
            }
            if !rec.v_a.is_finite() || rec.v_d.iter().any(|v| !v.is_finite()) {
                return Err(SolveError::NonFiniteVoltage { record: i });
            }
        }
        Ok(())
    }
}

/// A solver's answer: the chosen key, a solver-specific score (disagreement
/// distance, vote margin, or log-posterior) and whether any tie was broken
/// at random.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyEstimate {
    pub key: Key,
    pub score: f64,
    pub tie_broken: bool,
}

const MAX_KEYS: usize = 64;

/// Rescaled voltages of one record; only the first n data slots are live.
#[inline]
fn rescale_record(rec: &QueryRecord, cal: &CalibrationSet, n: usize) -> (f64, [f64; 6]) {
    let va = cal.ancilla().rescale(rec.v_a);
    let mut vd = [0.0; 6];
    for i in 0..n {
        vd[i] = cal.data(i).rescale(rec.v_d[i]);
    }
    (va, vd)
}

#[inline]
fn parity(mask: u8) -> u8 {
    (mask.count_ones() & 1) as u8
}

/// Index of the smallest value; ties picked uniformly with one range draw.
fn pick_min_u32<R: Rng + ?Sized>(counts: &[u32], rng: &mut R) -> (usize, bool) {
    let best = *counts.iter().min().expect("non-empty");
    let ties = counts.iter().filter(|&&c| c == best).count();
    if ties == 1 {
        (counts.iter().position(|&c| c == best).unwrap(), false)
    } else {
        let pick = rng.gen_range(0..ties);
        let idx = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == best)
            .nth(pick)
            .unwrap()
            .0;
        (idx, true)
    }
}

/// Index of the largest value under exact float comparison; ties (which
/// arise structurally, not from rounding luck) picked uniformly.
fn pick_max_f64<R: Rng + ?Sized>(vals: &[f64], rng: &mut R) -> (usize, bool) {
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = vals.iter().filter(|&&v| v == best).count();
    if ties == 1 {
        (vals.iter().position(|&v| v == best).unwrap(), false)
    } else {
        let pick = rng.gen_range(0..ties);
        let idx = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == best)
            .nth(pick)
            .unwrap()
            .0;
        (idx, true)
    }
}

/// Per-candidate-key disagreement counts sum_m |parity(d_m & k) - a_m| over
/// digitized records. This is the sufficient statistic of the digital
/// classical model: under symmetric label flips with rate below 1/2,
/// minimizing it is exhaustive maximum likelihood.
pub fn disagreement_counts<I>(digitized: I, n: usize) -> Vec<u32>
where
    I: IntoIterator<Item = (u8, u8)>,
{
    let nk = 1usize << n;
    let mut counts = vec![0u32; nk];
    for (d, a) in digitized {
        for (k, c) in counts.iter_mut().enumerate() {
            *c += u32::from(parity(d & k as u8) ^ a);
        }
    }
    counts
}

/// Digital classical solver: disagreement minimization over all 2^n keys.
pub fn solve_c_digital<R: Rng + ?Sized>(
    batch: &QueryBatch,
    rng: &mut R,
) -> Result<KeyEstimate, SolveError> {
    batch.validate()?;
    let n = batch.n;
    let counts = disagreement_counts(
        batch.records.iter().map(|rec| {
            let (va, vd) = rescale_record(rec, &batch.calibration, n);
            let d = (0..n).fold(0u8, |m, i| m | (digitize(vd[i], 0.5) << i));
            (d, digitize(va, 0.5))
        }),
        n,
    );
    let (idx, tie) = pick_min_u32(&counts, rng);
    Ok(KeyEstimate {
        key: Key::from_mask(idx as u8, n).unwrap(),
        score: counts[idx] as f64,
        tie_broken: tie,
    })
}

/// Shared core of the digital quantum solver: per-bit majority over kept
/// records, fair coin on per-bit ties (which also covers zero kept records).
fn majority_vote<R: Rng + ?Sized>(
    n: usize,
    kept: usize,
    ones: &[u32; 6],
    rng: &mut R,
) -> (u8, f64, bool) {
    let mut mask = 0u8;
    let mut tie = false;
    let mut margin = u32::MAX;
    for (i, &o) in ones.iter().enumerate().take(n) {
        let twice = 2 * o;
        let k = kept as u32;
        let bit = match twice.cmp(&k) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => {
                tie = true;
                rng.gen_range(0..2u8)
            }
        };
        mask |= bit << i;
        margin = margin.min(twice.abs_diff(k));
    }
    (mask, margin as f64, tie)
}

/// Digital quantum solver: postselect on digitized ancilla = 1, then
/// bit-wise majority vote over the kept data bits.
pub fn solve_q_digital<R: Rng + ?Sized>(
    batch: &QueryBatch,
    rng: &mut R,
) -> Result<KeyEstimate, SolveError> {
    batch.validate()?;
    let n = batch.n;
    let mut kept = 0usize;
    let mut ones = [0u32; 6];
    for rec in &batch.records {
        let (va, vd) = rescale_record(rec, &batch.calibration, n);
        if digitize(va, 0.5) == 1 {
            kept += 1;
            for (i, o) in ones.iter_mut().enumerate().take(n) {
                *o += u32::from(digitize(vd[i], 0.5));
            }
        }
    }
    let (mask, score, tie) = majority_vote(n, kept, &ones, rng);
    Ok(KeyEstimate {
        key: Key::from_mask(mask, n).unwrap(),
        score,
        tie_broken: tie,
    })
}

/// Per-qubit likelihood widths for the Bayesian solver: one pooled sigma per
/// qubit on the rescaled scale (the two populations are near-symmetric, and
/// pooling halves the calibration noise of the estimate).
fn pooled_sigmas(cal: &CalibrationSet, n: usize) -> ([f64; 6], f64) {
    let mut sig_d = [0.0; 6];
    for i in 0..n {
        let p = cal.data(i).rescaled();
        sig_d[i] = 0.5 * (p.sigma0 + p.sigma1);
    }
    let pa = cal.ancilla().rescaled();
    (sig_d, 0.5 * (pa.sigma0 + pa.sigma1))
}

/// Log posterior contributions of one record for every candidate key:
/// log sum over the 2^n data strings D of
/// exp[-(V_A - parity(D & k))^2 / 2 sigma_A^2] prod_i exp[-(V_Di - D_i)^2 / 2 sigma_i^2],
/// dropping key-independent normalization.
fn record_log_posteriors(
    n: usize,
    va: f64,
    vd: &[f64; 6],
    sig_d: &[f64; 6],
    sig_a: f64,
    out: &mut [f64; MAX_KEYS],
) {
    let nd = 1usize << n;
    let mut logd = [0.0f64; MAX_KEYS];
    for (d, slot) in logd.iter_mut().enumerate().take(nd) {
        let mut s = 0.0;
        for i in 0..n {
            let dev = vd[i] - ((d >> i) & 1) as f64;
            s -= dev * dev / (2.0 * sig_d[i] * sig_d[i]);
        }
        *slot = s;
    }
    let la = [
        -(va * va) / (2.0 * sig_a * sig_a),
        -((va - 1.0) * (va - 1.0)) / (2.0 * sig_a * sig_a),
    ];
    for (k, slot) in out.iter_mut().enumerate().take(nd) {
        let mut m = f64::NEG_INFINITY;
        for (d, &ld) in logd.iter().enumerate().take(nd) {
            m = m.max(ld + la[parity(d as u8 & k as u8) as usize]);
        }
        let mut acc = 0.0;
        for (d, &ld) in logd.iter().enumerate().take(nd) {
            acc += (ld + la[parity(d as u8 & k as u8) as usize] - m).exp();
        }
        *slot = m + acc.ln();
    }
}

/// Analog classical solver: Bayesian estimate over all 2^n keys with a flat
/// prior, marginalizing the unknown data string of every record.
pub fn solve_c_bayes<R: Rng + ?Sized>(
    batch: &QueryBatch,
    rng: &mut R,
) -> Result<KeyEstimate, SolveError> {
    batch.validate()?;
    let n = batch.n;
    let nk = 1usize << n;
    let (sig_d, sig_a) = pooled_sigmas(&batch.calibration, n);
    let mut logp = vec![0.0f64; nk];
    let mut rec_logp = [0.0f64; MAX_KEYS];
    for rec in &batch.records {
        let (va, vd) = rescale_record(rec, &batch.calibration, n);
        record_log_posteriors(n, va, &vd, &sig_d, sig_a, &mut rec_logp);
        for (acc, &v) in logp.iter_mut().zip(rec_logp.iter()) {
            *acc += v;
        }
    }
    let (idx, tie) = pick_max_f64(&logp, rng);
    Ok(KeyEstimate {
        key: Key::from_mask(idx as u8, n).unwrap(),
        score: logp[idx],
        tie_broken: tie,
    })
}

/// Shared core of the analog quantum solvers: average the (rescaled) data
/// voltages of the kept records and digitize each average against its
/// per-qubit threshold. Zero kept records fall back to a uniformly random
/// key.
fn analog_decide<R: Rng + ?Sized>(
    n: usize,
    kept: usize,
    sums: &[f64; 6],
    thresholds: &[f64; 6],
    rng: &mut R,
) -> (u8, f64, bool) {
    if kept == 0 {
        return (rng.gen_range(0..(1u16 << n)) as u8, 0.0, true);
    }
    let mut mask = 0u8;
    let mut margin = f64::INFINITY;
    for i in 0..n {
        let avg = sums[i] / kept as f64;
        mask |= digitize(avg, thresholds[i]) << i;
        margin = margin.min((avg - thresholds[i]).abs());
    }
    (mask, margin, false)
}

fn analog_thresholds(cal: &CalibrationSet, n: usize, eta_a: f64) -> [f64; 6] {
    let mut thr = [0.0; 6];
    for i in 0..n {
        thr[i] = calibrated_threshold(&cal.data(i).rescaled(), eta_a)
            .expect("separated calibration means give a threshold");
    }
    thr
}

/// Analog quantum solver: postselect on digitized ancilla = 1, average the
/// kept data voltages, digitize the averages at the mixture-calibrated
/// threshold for the given ancilla error.
pub fn solve_q_analog<R: Rng + ?Sized>(
    batch: &QueryBatch,
    eta_a: f64,
    rng: &mut R,
) -> Result<KeyEstimate, SolveError> {
    batch.validate()?;
    let n = batch.n;
    let thr = analog_thresholds(&batch.calibration, n, eta_a);
    let mut kept = 0usize;
    let mut sums = [0.0f64; 6];
    for rec in &batch.records {
        let (va, vd) = rescale_record(rec, &batch.calibration, n);
        if digitize(va, 0.5) == 1 {
            kept += 1;
            for i in 0..n {
                sums[i] += vd[i];
            }
        }
    }
    let (mask, score, tie) = analog_decide(n, kept, &sums, &thr, rng);
    Ok(KeyEstimate {
        key: Key::from_mask(mask, n).unwrap(),
        score,
        tie_broken: tie,
    })
}

/// Analog quantum solver without postselection: every record is kept and
/// the thresholds are computed for an ancilla that carries no information
/// (eta_a = 0.5).
pub fn solve_qprime_analog<R: Rng + ?Sized>(
    batch: &QueryBatch,
    rng: &mut R,
) -> Result<KeyEstimate, SolveError> {
    batch.validate()?;
    let n = batch.n;
    let thr = analog_thresholds(&batch.calibration, n, 0.5);
    let mut sums = [0.0f64; 6];
    for rec in &batch.records {
        let (_, vd) = rescale_record(rec, &batch.calibration, n);
        for i in 0..n {
            sums[i] += vd[i];
        }
    }
    let (mask, score, tie) = analog_decide(n, batch.records.len(), &sums, &thr, rng);
    Ok(KeyEstimate {
        key: Key::from_mask(mask, n).unwrap(),
        score,
        tie_broken: tie,
    })
}
