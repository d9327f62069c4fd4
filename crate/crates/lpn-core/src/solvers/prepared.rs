//! Precomputed per-record statistics for fast resampling.
//!
//! The resampling harness solves thousands of random subsets of one fixed
//! pool. All five solvers decompose into a per-record statistic followed by
//! an aggregation, so the statistic is computed once per pool here and each
//! subset solve touches only additions. The aggregation and tie-breaking
//! code is shared with the direct solvers, so for a subset presented in the
//! same order and the same stream state, `PreparedPool::solve` and the
//! corresponding `solve_*` return identical results.

use super::{
    analog_decide, analog_thresholds, majority_vote, pick_max_f64, pick_min_u32, pooled_sigmas,
    record_log_posteriors, rescale_record, QueryBatch, SolveError, SolverId, MAX_KEYS,
};
use crate::readout::digitize;
use rand::Rng;

enum Body {
    /// Per-record 0/1 disagreement with each candidate key, stride 2^n.
    CDigital { dis: Vec<u8> },
    /// Per-record log posterior contribution per candidate key, stride 2^n.
    CBayes { logp: Vec<f64> },
    /// Bit 7 set if the record survives postselection; low bits hold the
    /// digitized data.
    QDigital { rec: Vec<u8> },
    /// Rescaled data voltages (stride n), postselection flags, thresholds.
    QAnalog {
        kept: Vec<bool>,
        vd: Vec<f64>,
        thr: [f64; 6],
    },
    QPrime { vd: Vec<f64>, thr: [f64; 6] },
}

pub struct PreparedPool {
    n: usize,
    pool_size: usize,
    body: Body,
}

impl PreparedPool {
    /// Precompute the statistics `solver` needs over the whole pool.
    /// `eta_a` is only read by the postselected analog solver.
    pub fn build(solver: SolverId, batch: &QueryBatch, eta_a: f64) -> Result<Self, SolveError> {
        batch.validate()?;
        let n = batch.n;
        let nk = 1usize << n;
        let cal = &batch.calibration;
        let body = match solver {
            SolverId::CDigital => {
                let mut dis = Vec::with_capacity(batch.records.len() * nk);
                for rec in &batch.records {
                    let (va, vd) = rescale_record(rec, cal, n);
                    let d = (0..n).fold(0u8, |m, i| m | (digitize(vd[i], 0.5) << i));
                    let a = digitize(va, 0.5);
                    for k in 0..nk {
                        dis.push(((d & k as u8).count_ones() as u8 & 1) ^ a);
                    }
                }
                Body::CDigital { dis }
            }
            SolverId::CBayes => {
                let (sig_d, sig_a) = pooled_sigmas(cal, n);
                let mut logp = Vec::with_capacity(batch.records.len() * nk);
                let mut rec_logp = [0.0f64; MAX_KEYS];
                for rec in &batch.records {
                    let (va, vd) = rescale_record(rec, cal, n);
                    record_log_posteriors(n, va, &vd, &sig_d, sig_a, &mut rec_logp);
                    logp.extend_from_slice(&rec_logp[..nk]);
                }
                Body::CBayes { logp }
            }
            SolverId::QDigital => {
                let rec = batch
                    .records
                    .iter()
                    .map(|r| {
                        let (va, vd) = rescale_record(r, cal, n);
                        let d = (0..n).fold(0u8, |m, i| m | (digitize(vd[i], 0.5) << i));
                        d | (digitize(va, 0.5) << 7)
                    })
                    .collect();
                Body::QDigital { rec }
            }
            SolverId::QAnalog => {
                let (kept, vd) = flatten_voltages(batch, true);
                Body::QAnalog {
                    kept,
                    vd,
                    thr: analog_thresholds(cal, n, eta_a),
                }
            }
            SolverId::QPrimeAnalog => {
                let (_, vd) = flatten_voltages(batch, false);
                Body::QPrime {
                    vd,
                    thr: analog_thresholds(cal, n, 0.5),
                }
            }
        };
        Ok(PreparedPool {
            n,
            pool_size: batch.records.len(),
            body,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    /// Solve the subset given by `indices` (into the pool). Returns the
    /// estimated key as a mask plus the tie flag.
    pub fn solve<R: Rng + ?Sized>(&self, indices: &[u32], rng: &mut R) -> (u8, bool) {
        let n = self.n;
        let nk = 1usize << n;
        match &self.body {
            Body::CDigital { dis } => {
                let mut counts = [0u32; MAX_KEYS];
                for &ri in indices {
                    let row = &dis[ri as usize * nk..ri as usize * nk + nk];
                    for (c, &v) in counts.iter_mut().zip(row) {
                        *c += u32::from(v);
                    }
                }
                let (idx, tie) = pick_min_u32(&counts[..nk], rng);
                (idx as u8, tie)
            }
            Body::CBayes { logp } => {
                let mut acc = [0.0f64; MAX_KEYS];
                for &ri in indices {
                    let row = &logp[ri as usize * nk..ri as usize * nk + nk];
                    for (a, &v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                let (idx, tie) = pick_max_f64(&acc[..nk], rng);
                (idx as u8, tie)
            }
            Body::QDigital { rec } => {
                let mut kept = 0usize;
                let mut ones = [0u32; 6];
                for &ri in indices {
                    let r = rec[ri as usize];
                    if r & 0x80 != 0 {
                        kept += 1;
                        for (i, o) in ones.iter_mut().enumerate().take(n) {
                            *o += u32::from((r >> i) & 1);
                        }
                    }
                }
                let (mask, _, tie) = majority_vote(n, kept, &ones, rng);
                (mask, tie)
            }
            Body::QAnalog { kept, vd, thr } => {
                let mut count = 0usize;
                let mut sums = [0.0f64; 6];
                for &ri in indices {
                    let ri = ri as usize;
                    if kept[ri] {
                        count += 1;
                        for (i, s) in sums.iter_mut().enumerate().take(n) {
                            *s += vd[ri * n + i];
                        }
                    }
                }
                let (mask, _, tie) = analog_decide(n, count, &sums, thr, rng);
                (mask, tie)
            }
            Body::QPrime { vd, thr } => {
                let mut sums = [0.0f64; 6];
                for &ri in indices {
                    let ri = ri as usize;
                    for (i, s) in sums.iter_mut().enumerate().take(n) {
                        *s += vd[ri * n + i];
                    }
                }
                let (mask, _, tie) = analog_decide(n, indices.len(), &sums, thr, rng);
                (mask, tie)
            }
        }
    }
}

/// Rescaled data voltages of every record, flattened with stride n, plus
/// postselection flags when requested.
fn flatten_voltages(batch: &QueryBatch, with_postselect: bool) -> (Vec<bool>, Vec<f64>) {
    let n = batch.n;
    let mut kept = Vec::with_capacity(batch.records.len());
    let mut vd = Vec::with_capacity(batch.records.len() * n);
    for rec in &batch.records {
        let (va, rvd) = rescale_record(rec, &batch.calibration, n);
        if with_postselect {
            kept.push(digitize(va, 0.5) == 1);
        }
        vd.extend_from_slice(&rvd[..n]);
    }
    (kept, vd)
}
