//! Experiment configuration: JSON schema, defaults and validation.

use crate::oracle::{Key, NoiseModel, OracleError, OracleMode, MAX_N};
use crate::solvers::SolverId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("n = {0} outside [1, {MAX_N}]")]
    BadRegisterSize(usize),
    #[error("key spec must be \"all\" or a list of bitstrings, got {0:?}")]
    BadKeySpec(String),
    #[error("bad key {key:?}")]
    BadKey { key: String, source: OracleError },
    #[error("key {0:?} does not match n")]
    KeyLength(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("key list resolves to no keys")]
    EmptyKeys,
    #[error("no solvers requested")]
    EmptySolvers,
    #[error("duplicate solver {0}")]
    DuplicateSolver(SolverId),
    #[error("solver {solver} needs a {needs} pool but modes exclude it")]
    ModeMissing { solver: SolverId, needs: OracleMode },
    #[error("invalid noise model")]
    Noise(#[from] OracleError),
    #[error("sweep values are empty")]
    EmptySweep,
    #[error("sweep value {0} is invalid for the swept parameter")]
    BadSweepValue(f64),
    #[error("pool_size must be at least 1")]
    EmptyPool,
    #[error("resample_trials = {0} outside [1000, 4000]")]
    BadTrials(usize),
    #[error("n_grid must be non-empty and within [1, pool_size]")]
    BadGrid,
    #[error("p_target = {0} outside (0, 1)")]
    BadTarget(f64),
    #[error("credible_level = {0} outside (0, 1)")]
    BadLevel(f64),
    #[error("calibration_shots = {0} below 100")]
    BadCalibrationShots(usize),
}

/// Which keys to run: every key of length n, or an explicit list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeySpec {
    Named(String),
    List(Vec<String>),
}

impl Default for KeySpec {
    fn default() -> Self {
        KeySpec::Named("all".to_string())
    }
}

/// Scalar eta_d applies to every data qubit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Scalar(f64),
    PerQubit(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub two_qubit_depol: f64,
    #[serde(default)]
    pub idle_depol: f64,
    pub eta_a: f64,
    pub eta_d: EtaSpec,
}

impl NoiseConfig {
    pub fn to_model(&self, n: usize) -> NoiseModel {
        let eta_d = match &self.eta_d {
            EtaSpec::Scalar(v) => vec![*v; n],
            EtaSpec::PerQubit(v) => v.clone(),
        };
        NoiseModel {
            two_qubit_depol: self.two_qubit_depol,
            idle_depol: self.idle_depol,
            eta_a: self.eta_a,
            eta_d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    EtaA,
    EtaD,
    TwoQubitDepol,
    IdleDepol,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::EtaA => "eta_a",
            SweepParam::EtaD => "eta_d",
            SweepParam::TwoQubitDepol => "two_qubit_depol",
            SweepParam::IdleDepol => "idle_depol",
        }
    }
}

/// One-parameter sweep; all other noise parameters stay at their base
/// values.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_pool_size() -> usize {
    10_000
}

fn default_trials() -> usize {
    2_000
}

fn default_p_target() -> f64 {
    0.01
}

fn default_calibration_shots() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(default)]
    pub keys: KeySpec,
    /// Keep only keys whose last bit is 0 (halves the key set for larger n).
    #[serde(default)]
    pub restrict_last_bit_zero: bool,
    pub solvers: Vec<SolverId>,
    /// Pools to generate; defaults to exactly the modes the solvers need.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<OracleMode>>,
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default = "default_trials")]
    pub resample_trials: usize,
    /// Subset sizes; defaults to 10 points per decade from 1 to
    /// min(pool_size, 10^4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default = "default_p_target")]
    pub p_target: f64,
    /// Per-key credible level; defaults to 1 - 0.05/2^n so that all keys
    /// are simultaneously covered at 95% by the union bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credible_level: Option<f64>,
    #[serde(default = "default_calibration_shots")]
    pub calibration_shots: usize,
    #[serde(default)]
    pub master_seed: u64,
}

/// Log-spaced default grid, 10 points per decade from 1 to
/// min(pool_size, 10^4), deduplicated after rounding.
pub fn default_n_grid(pool_size: usize) -> Vec<usize> {
    let top = pool_size.min(10_000);
    let mut grid: Vec<usize> = (0..=40)
        .map(|i| 10f64.powf(i as f64 / 10.0).round() as usize)
        .filter(|&v| v >= 1 && v <= top)
        .collect();
    grid.dedup();
    grid
}

/// One noise setting of a campaign; `sweep_value` is set when it came from
/// a sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePoint {
    pub sweep_value: Option<f64>,
    pub model: NoiseModel,
}

/// A validated configuration with every default resolved.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub keys: Vec<Key>,
    pub modes: Vec<OracleMode>,
    pub points: Vec<NoisePoint>,
    pub n_grid: Vec<usize>,
    pub credible_level: f64,
}

pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedConfig, ConfigError> {
    let n = config.n;
    if n == 0 || n > MAX_N {
        return Err(ConfigError::BadRegisterSize(n));
    }

    let mut keys = match &config.keys {
        KeySpec::Named(s) if s == "all" => Key::all(n).unwrap(),
        KeySpec::Named(s) => return Err(ConfigError::BadKeySpec(s.clone())),
        KeySpec::List(list) => {
            let mut keys = Vec::with_capacity(list.len());
            for s in list {
                let key: Key = s.parse().map_err(|source| ConfigError::BadKey {
                    key: s.clone(),
                    source,
                })?;
                if key.n() != n {
                    return Err(ConfigError::KeyLength(s.clone()));
                }
                if keys.contains(&key) {
                    return Err(ConfigError::DuplicateKey(s.clone()));
                }
                keys.push(key);
            }
            keys
        }
    };
    if config.restrict_last_bit_zero {
        keys.retain(|k| k.bit(n - 1) == 0);
    }
    if keys.is_empty() {
        return Err(ConfigError::EmptyKeys);
    }

    if config.solvers.is_empty() {
        return Err(ConfigError::EmptySolvers);
    }
    for (i, s) in config.solvers.iter().enumerate() {
        if config.solvers[..i].contains(s) {
            return Err(ConfigError::DuplicateSolver(*s));
        }
    }

    let needed: Vec<OracleMode> = {
        let mut m: Vec<OracleMode> = config.solvers.iter().map(|s| s.mode()).collect();
        m.sort_by_key(|m| m.id());
        m.dedup();
        m
    };
    let modes = match &config.modes {
        None => needed.clone(),
        Some(listed) => {
            let mut m = listed.clone();
            m.sort_by_key(|m| m.id());
            m.dedup();
            for solver in &config.solvers {
                if !m.contains(&solver.mode()) {
                    return Err(ConfigError::ModeMissing {
                        solver: *solver,
                        needs: solver.mode(),
                    });
                }
            }
            m
        }
    };

    let base = config.noise.to_model(n);
    base.validate(n)?;
    let points = match &config.sweep {
        None => vec![NoisePoint {
            sweep_value: None,
            model: base,
        }],
        Some(sweep) => {
            if sweep.values.is_empty() {
                return Err(ConfigError::EmptySweep);
            }
            sweep
                .values
                .iter()
                .map(|&v| {
                    let mut model = base.clone();
                    match sweep.param {
                        SweepParam::EtaA => model.eta_a = v,
                        SweepParam::EtaD => model.eta_d = vec![v; n],
                        SweepParam::TwoQubitDepol => model.two_qubit_depol = v,
                        SweepParam::IdleDepol => model.idle_depol = v,
                    }
                    model
                        .validate(n)
                        .map_err(|_| ConfigError::BadSweepValue(v))?;
                    Ok(NoisePoint {
                        sweep_value: Some(v),
                        model,
                    })
                })
                .collect::<Result<_, ConfigError>>()?
        }
    };

    if config.pool_size == 0 {
        return Err(ConfigError::EmptyPool);
    }
    if !(1000..=4000).contains(&config.resample_trials) {
        return Err(ConfigError::BadTrials(config.resample_trials));
    }
    if config.calibration_shots < 100 {
        return Err(ConfigError::BadCalibrationShots(config.calibration_shots));
    }

    let n_grid = match &config.n_grid {
        None => default_n_grid(config.pool_size),
        Some(g) => {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            g
        }
    };
    if n_grid.is_empty() || n_grid[0] < 1 || *n_grid.last().unwrap() > config.pool_size {
        return Err(ConfigError::BadGrid);
    }

    if !(config.p_target > 0.0 && config.p_target < 1.0) {
        return Err(ConfigError::BadTarget(config.p_target));
    }
    let credible_level = config
        .credible_level
        .unwrap_or(1.0 - 0.05 / (1u64 << n) as f64);
    if !(credible_level > 0.0 && credible_level < 1.0) {
        return Err(ConfigError::BadLevel(credible_level));
    }

    Ok(ResolvedConfig {
        config: config.clone(),
        keys,
        modes,
        points,
        n_grid,
        credible_level,
    })
}
