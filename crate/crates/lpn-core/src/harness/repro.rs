//! Canned benchmark configurations.
//!
//! Three ready-made campaigns cover the standard comparisons: `fig2` pits
//! the digital solvers against each other at n = 2, `fig3` adds the analog
//! solvers and n = 3, and `fig4` sweeps the ancilla readout error at n = 3
//! for the analog solvers, including the eta_a = 0.5 extrapolation point
//! where postselection carries no information.
//!
//! Default noise: two-qubit depolarizing 0.12 (the strength implied by an
//! average CNOT fidelity of 0.91), ancilla assignment error 0.05, data
//! assignment error 0.3 (0.2 for the sweep campaign, whose focus is the
//! ancilla).

use crate::harness::campaign::{run_campaign, CampaignOutput};
use crate::harness::config::{
    EtaSpec, ExperimentConfig, KeySpec, NoiseConfig, SweepParam, SweepSpec,
};
use crate::harness::HarnessError;
use crate::solvers::SolverId;
use std::path::Path;

/// 15 log-spaced subset sizes, 1 to 10^4.
pub const GRID_COARSE: [usize; 15] = [
    1, 2, 4, 7, 14, 27, 52, 100, 193, 372, 719, 1389, 2683, 5179, 10_000,
];

/// 8 points per decade, 1 to 10^4; fine enough to place intercepts between
/// grid points reliably.
pub const GRID_FINE: [usize; 31] = [
    1, 2, 3, 4, 6, 7, 10, 13, 18, 24, 32, 42, 56, 75, 100, 133, 178, 237, 316, 422, 562, 750,
    1000, 1334, 1778, 2371, 3162, 4217, 5623, 7499, 10_000,
];

fn base_config(n: usize, solvers: Vec<SolverId>, eta_d: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n,
        keys: KeySpec::default(),
        restrict_last_bit_zero: false,
        solvers,
        modes: None,
        noise: NoiseConfig {
            two_qubit_depol: 0.12,
            idle_depol: 0.0,
            eta_a: 0.05,
            eta_d: EtaSpec::Scalar(eta_d),
        },
        sweep: None,
        pool_size: 10_000,
        resample_trials: 2_000,
        n_grid: Some(GRID_COARSE.to_vec()),
        p_target: 0.01,
        credible_level: None,
        calibration_shots: 10_000,
        master_seed: seed,
    }
}

/// n = 2, all four keys, digital solvers only.
pub fn config_fig2(seed: u64) -> ExperimentConfig {
    base_config(
        2,
        vec![SolverId::CDigital, SolverId::QDigital],
        0.3,
        seed,
    )
}

/// Digital and analog solvers at one register size; `fig3` runs this for
/// n = 2 and n = 3.
pub fn config_fig3(n: usize, seed: u64) -> ExperimentConfig {
    base_config(
        n,
        vec![
            SolverId::CDigital,
            SolverId::CBayes,
            SolverId::QDigital,
            SolverId::QAnalog,
        ],
        0.3,
        seed,
    )
}

/// n = 3 ancilla-error sweep for the analog solvers.
pub fn config_fig4(seed: u64) -> ExperimentConfig {
    let mut cfg = base_config(
        3,
        vec![SolverId::CBayes, SolverId::QAnalog, SolverId::QPrimeAnalog],
        0.2,
        seed,
    );
    cfg.sweep = Some(SweepSpec {
        param: SweepParam::EtaA,
        values: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50],
    });
    cfg.n_grid = Some(GRID_FINE.to_vec());
    cfg
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(format!("unknown figure {other:?} (expected fig2|fig3|fig4)")),
        }
    }
}

/// Run a canned campaign into `out_dir`. `fig3` produces two subdirectories
/// (`n2/`, `n3/`), the others write at the top level. Returns the outputs
/// in run order.
pub fn run_figure(
    figure: Figure,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<CampaignOutput>, HarnessError> {
    match figure {
        Figure::Fig2 => Ok(vec![run_campaign(&config_fig2(seed), out_dir)?]),
        Figure::Fig3 => {
            let mut outs = Vec::with_capacity(2);
            for n in [2usize, 3] {
                let cfg = config_fig3(n, seed);
                outs.push(run_campaign(&cfg, &out_dir.join(format!("n{n}")))?);
            }
            Ok(outs)
        }
        Figure::Fig4 => Ok(vec![run_campaign(&config_fig4(seed), out_dir)?]),
    }
}
