//! Error-curve estimation: subset resampling, Jeffreys credible intervals,
//! antitonic regression, and query-count intercepts.
//!
//! The pipeline mirrors a fixed-dataset benchmark. A pool of queries is
//! collected once; for each subset size N the solver runs on a few thousand
//! random subsets drawn without replacement, the failure fraction gets a
//! Jeffreys Beta(f + 1/2, t - f + 1/2) credible interval, both interval
//! envelopes are regressed to be non-increasing in N, and the N at which an
//! envelope crosses the target error is read off by log-log interpolation.

use crate::oracle::Key;
use crate::rng::SeedStream;
use crate::solvers::SolverId;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("subset size {n} exceeds pool size {pool}")]
    SubsetTooLarge { n: usize, pool: usize },
    #[error("subset size must be at least 1")]
    EmptySubset,
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("failures {failures} exceed trials {trials}")]
    FailuresExceedTrials { failures: usize, trials: usize },
    #[error("level {0} outside (0, 1)")]
    BadLevel(f64),
    #[error("target {0} outside (0, 1)")]
    BadTarget(f64),
    #[error("values and weights differ in length ({values} vs {weights})")]
    LengthMismatch { values: usize, weights: usize },
    #[error("weights must be positive and finite")]
    NonPositiveWeight,
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("query counts must be strictly increasing")]
    GridNotIncreasing,
}

/// Resampling result for one (solver, key, N) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub wrong: usize,
    pub trials: usize,
}

impl TrialOutcome {
    pub fn error_rate(&self) -> f64 {
        self.wrong as f64 / self.trials as f64
    }
}

/// Reusable buffer for drawing subsets without replacement.
///
/// A partial Fisher-Yates shuffle draws a uniform subset in O(N); the swaps
/// are recorded and undone afterwards so the backing permutation returns to
/// identity, keeping per-trial cost independent of the pool size and the
/// buffer reusable across trials (each trial still owns its derived stream,
/// so results do not depend on which thread ran it).
struct SubsetScratch {
    perm: Vec<u32>,
    swaps: Vec<u32>,
    out: Vec<u32>,
}

impl SubsetScratch {
    fn new(pool: usize) -> Self {
        SubsetScratch {
            perm: (0..pool as u32).collect(),
            swaps: Vec::new(),
            out: Vec::new(),
        }
    }

    fn sample<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> &[u32] {
        let m = self.perm.len();
        self.swaps.clear();
        self.out.clear();
        for j in 0..n {
            let r = rng.gen_range(j..m);
            self.perm.swap(j, r);
            self.swaps.push(r as u32);
            self.out.push(self.perm[j]);
        }
        for j in (0..n).rev() {
            self.perm.swap(j, self.swaps[j] as usize);
        }
        &self.out
    }
}

/// Estimate a solver's failure count at subset size `n_queries` by drawing
/// `trials` uniform subsets (without replacement) from a pool of
/// `pool_size` records.
///
/// `solve_is_correct` receives the subset indices and a per-trial random
/// stream (used for subset order consumption and tie-breaking) and reports
/// whether the solver recovered the true key. Trials run in parallel;
/// results are bit-identical for a fixed `stream` regardless of thread
/// count because trial t always uses `stream.child(t)`.
pub fn estimate_error<F>(
    solve_is_correct: F,
    pool_size: usize,
    n_queries: usize,
    trials: usize,
    stream: SeedStream,
) -> Result<TrialOutcome, StatsError>
where
    F: Fn(&[u32], &mut ChaCha8Rng) -> bool + Sync,
{
    if n_queries == 0 {
        return Err(StatsError::EmptySubset);
    }
    if n_queries > pool_size {
        return Err(StatsError::SubsetTooLarge {
            n: n_queries,
            pool: pool_size,
        });
    }
    if trials == 0 {
        return Err(StatsError::ZeroTrials);
    }
    let wrong = (0..trials)
        .into_par_iter()
        .map_init(
            || SubsetScratch::new(pool_size),
            |scratch, t| {
                let mut rng = stream.child(t as u64).rng();
                let subset = scratch.sample(n_queries, &mut rng);
                usize::from(!solve_is_correct(subset, &mut rng))
            },
        )
        .sum();
    Ok(TrialOutcome { wrong, trials })
}

/// Equal-tailed credible interval of Beta(failures + 1/2, trials - failures
/// + 1/2). The boundary cases pin to the exact endpoints: zero failures give
/// lo = 0 and all-failures give hi = 1.
pub fn jeffreys_interval(
    failures: usize,
    trials: usize,
    level: f64,
) -> Result<(f64, f64), StatsError> {
    if trials == 0 {
        return Err(StatsError::ZeroTrials);
    }
    if failures > trials {
        return Err(StatsError::FailuresExceedTrials { failures, trials });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::BadLevel(level));
    }
    let alpha = 1.0 - level;
    let beta = Beta::new(failures as f64 + 0.5, (trials - failures) as f64 + 0.5)
        .expect("shape parameters are positive");
    let lo = if failures == 0 {
        0.0
    } else {
        beta_quantile(&beta, alpha / 2.0)
    };
    let hi = if failures == trials {
        1.0
    } else {
        beta_quantile(&beta, 1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

/// Beta quantile to full precision. The generic `inverse_cdf` is a coarse
/// bisection, so refine it by Newton steps against the accurate
/// regularized-incomplete-beta cdf, with bisection as the fallback when a
/// step leaves the current bracket.
fn beta_quantile(beta: &Beta, q: f64) -> f64 {
    let mut x = beta.inverse_cdf(q).clamp(f64::MIN_POSITIVE, 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let err = beta.cdf(x) - q;
        if err > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let pdf = beta.pdf(x);
        let mut next = if pdf > 0.0 { x - err / pdf } else { x };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// Weighted least-squares non-increasing fit by pool-adjacent-violators.
pub fn antitonic_pava(values: &[f64], weights: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.len() != weights.len() {
        return Err(StatsError::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(StatsError::NonPositiveWeight);
    }
    // (weight, weighted sum, block length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((w, v * w, 1));
        while blocks.len() >= 2 {
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            if prev.1 / prev.0 < last.1 / last.0 {
                blocks.pop();
                let top = blocks.last_mut().unwrap();
                top.0 += last.0;
                top.1 += last.1;
                top.2 += last.2;
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (w, sum, len) in blocks {
        out.extend(std::iter::repeat(sum / w).take(len));
    }
    Ok(out)
}

/// One row of an error curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub n_queries: usize,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_mono: f64,
    pub hi_mono: f64,
}

/// Error probability versus query count for one (solver, key) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurve {
    pub solver: SolverId,
    pub key: Key,
    pub points: Vec<CurvePoint>,
}

/// Assemble a curve from per-N resampling outcomes: Jeffreys intervals at
/// `level`, then antitonic regression (unit weights) on each envelope.
pub fn build_curve(
    solver: SolverId,
    key: Key,
    raw: &[(usize, TrialOutcome)],
    level: f64,
) -> Result<ErrorCurve, StatsError> {
    if raw.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if raw.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(StatsError::GridNotIncreasing);
    }
    let mut lo = Vec::with_capacity(raw.len());
    let mut hi = Vec::with_capacity(raw.len());
    for &(_, out) in raw {
        let (l, h) = jeffreys_interval(out.wrong, out.trials, level)?;
        lo.push(l);
        hi.push(h);
    }
    let ones = vec![1.0; raw.len()];
    let lo_mono = antitonic_pava(&lo, &ones)?;
    let hi_mono = antitonic_pava(&hi, &ones)?;
    let points = raw
        .iter()
        .enumerate()
        .map(|(i, &(n, out))| CurvePoint {
            n_queries: n,
            p_hat: out.error_rate(),
            lo: lo[i],
            hi: hi[i],
            lo_mono: lo_mono[i],
            hi_mono: hi_mono[i],
        })
        .collect();
    Ok(ErrorCurve {
        solver,
        key,
        points,
    })
}

/// Query-count interval at a target error probability. `censored` marks a
/// right-censored interval: the upper envelope never reached the target
/// within the measured range, so `hi` (and possibly `lo`) sits at the
/// largest measured N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NInterval {
    pub lo: f64,
    pub hi: f64,
    pub censored: bool,
}

impl NInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// First crossing of a non-increasing envelope with `p`, interpolated
/// linearly in (log N, log p). A curve entirely below the target crosses at
/// the smallest measured N; an exact zero cannot be placed on the log
/// scale, so a crossing into zero takes the interpolation's limiting
/// value, the previous grid point (keeping the crossing continuous and
/// monotone in the curve values).
fn crossing(ns: &[usize], ys: &[f64], p: f64) -> (f64, bool) {
    match ys.iter().position(|&y| y <= p) {
        None => (*ns.last().unwrap() as f64, true),
        Some(0) => (ns[0] as f64, false),
        Some(i) => {
            let (y0, y1) = (ys[i - 1], ys[i]);
            if y1 <= 0.0 {
                return (ns[i - 1] as f64, false);
            }
            let (n0, n1) = ((ns[i - 1] as f64).ln(), (ns[i] as f64).ln());
            let t = (p.ln() - y0.ln()) / (y1.ln() - y0.ln());
            ((n0 + t * (n1 - n0)).exp(), false)
        }
    }
}

/// Interval for the number of queries needed to reach `p_target`: the upper
/// envelope's crossing bounds it from above, the lower envelope's from
/// below.
pub fn n_at_target(curve: &ErrorCurve, p_target: f64) -> Result<NInterval, StatsError> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(StatsError::BadTarget(p_target));
    }
    if curve.points.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let ns: Vec<usize> = curve.points.iter().map(|p| p.n_queries).collect();
    let his: Vec<f64> = curve.points.iter().map(|p| p.hi_mono).collect();
    let los: Vec<f64> = curve.points.iter().map(|p| p.lo_mono).collect();
    let (hi, hi_censored) = crossing(&ns, &his, p_target);
    let (lo, lo_censored) = crossing(&ns, &los, p_target);
    Ok(NInterval {
        lo,
        hi,
        censored: hi_censored || lo_censored,
    })
}

/// Interval arithmetic mean over keys; censoring propagates.
pub fn average_over_keys(intervals: &[NInterval]) -> Result<NInterval, StatsError> {
    if intervals.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let m = intervals.len() as f64;
    Ok(NInterval {
        lo: intervals.iter().map(|i| i.lo).sum::<f64>() / m,
        hi: intervals.iter().map(|i| i.hi).sum::<f64>() / m,
        censored: intervals.iter().any(|i| i.censored),
    })
}
