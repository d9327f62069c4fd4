//! Campaign orchestration: config handling, dataset generation, solver
//! sweeps and deterministic persistence.

pub mod campaign;
pub mod config;
pub mod emit;
pub mod repro;

pub use campaign::{run_campaign, run_simulate, CampaignOutput, PointCurve, SweepRow};
pub use config::{
    default_n_grid, resolve, ConfigError, EtaSpec, ExperimentConfig, KeySpec, NoiseConfig,
    NoisePoint, ResolvedConfig, SweepParam, SweepSpec,
};
pub use repro::{run_figure, Figure};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
    #[error(transparent)]
    Readout(#[from] crate::readout::ReadoutError),
    #[error(transparent)]
    Solve(#[from] crate::solvers::SolveError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
